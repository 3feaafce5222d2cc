#!/usr/bin/env python3
"""External backend adapter for HiGHS.

Usage (through the environment):

    PARACITY_SOLVER_CMD='python3 scripts/highs_backend.py {lp} {sol}'

Reads the LP file, solves it with highspy and writes one `name value`
pair per line, or `status infeasible` / `status unbounded`.
"""
import sys

import highspy


def main(lp_path: str, sol_path: str) -> int:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 1e-9)
    h.readModel(lp_path)
    h.run()
    status = h.getModelStatus()
    with open(sol_path, "w") as out:
        if status == highspy.HighsModelStatus.kInfeasible:
            out.write("status infeasible\n")
            return 0
        if status in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            out.write("status unbounded\n")
            return 0
        if status != highspy.HighsModelStatus.kOptimal:
            out.write(f"status {h.modelStatusToString(status).replace(' ', '_')}\n")
            return 0
        lp = h.getLp()
        values = h.getSolution().col_value
        for name, v in zip(lp.col_names_, values):
            out.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
