"""DICOM upper-layer networking: PDU codec and the DIMSE server."""
