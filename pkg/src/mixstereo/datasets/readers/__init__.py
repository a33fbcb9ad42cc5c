__all__ = ["DatasetReader", "get_reader", "list_readers", "register", "scan_dataset"]

from .base import DatasetReader
from .registry import get_reader, list_readers, register
from .scan import scan_dataset
