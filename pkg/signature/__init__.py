from .operations import RESERVED_CHARACTERS, ARG_PREFIX, OperationKind, OperationDef, Signature, SignatureError, ValidationReport, validate_signature, is_alphabet_string
from .names import NameParseError, NodeRole, ElementName, ParsedName, parse_name, parse_element_name, output_node_name, input_node_name, element_name, input_ports
