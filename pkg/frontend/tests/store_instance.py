"""Store one synthetic instance into a running archive over DIMSE.

Usage: python3 store_instance.py PORT SOP_UID PATIENT_NAME
Prints the C-STORE status as hex on stdout.
"""

import pathlib
import sys

REPO_TESTS = pathlib.Path(__file__).resolve().parents[2] / "tests"
sys.path.insert(0, str(REPO_TESTS))

from scu import Association  # noqa: E402
from support import build_instance  # noqa: E402


def main() -> int:
    port, sop_uid, patient_name = int(sys.argv[1]), sys.argv[2], sys.argv[3]
    parts = sop_uid.rsplit(".", 2)
    study_uid = parts[0] if len(parts) == 3 else "77.1"
    series_uid = ".".join(parts[:2]) if len(parts) == 3 else "77.1.1"
    obj = build_instance(patient_name=patient_name, patient_id="OPLOOP",
                         study_uid=study_uid, series_uid=series_uid, sop_uid=sop_uid)
    assoc = Association("127.0.0.1", port)
    if assoc.rejected:
        print("rejected")
        return 1
    status = assoc.store(obj)
    assoc.release()
    assoc.close()
    print(f"0x{status:04X}")
    return 0 if status == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
