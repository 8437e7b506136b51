"""minipacs: a miniature extensible PACS archive.

Indexes all DICOM metadata into a searchable inverted index, speaks the
DICOM upper-layer protocol (C-ECHO / C-STORE / C-FIND) and a DICOMweb
subset (QIDO-RS / WADO-RS), and is extensible through five plugin
categories: Indexer, QueryProvider, Storage, WebService, and WebUI.
"""

__version__ = "0.1.0"
