"""HTTP service layer and DICOM JSON encoding."""
