"""metawipe: inspect and remove metadata from common file formats."""

from .core import (
    Category,
    CleanPolicy,
    CleanResult,
    Confidence,
    FieldKind,
    FieldValue,
    FileKind,
    Kind,
    MetadataEntry,
    ParseError,
    ScrubError,
    Status,
    UnknownMemberAction,
    UnsupportedFormatError,
    anonymize_field,
    clean_file,
    detect_kind,
    inspect_file,
)

__all__ = [
    "Category",
    "CleanPolicy",
    "CleanResult",
    "Confidence",
    "FieldKind",
    "FieldValue",
    "FileKind",
    "Kind",
    "MetadataEntry",
    "ParseError",
    "ScrubError",
    "Status",
    "UnknownMemberAction",
    "UnsupportedFormatError",
    "anonymize_field",
    "clean_file",
    "detect_kind",
    "inspect_file",
]

__version__ = "0.1.0"
