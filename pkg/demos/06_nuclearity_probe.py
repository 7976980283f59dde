"""Searching for a gap between the minimal and maximal tensor cones.

The 7-dimensional subsystem of M3 with vanishing outer corners is the
smallest standard suspect for a system whose minimal and maximal tensor
products disagree against some partner.  The probe samples elements on
the boundary of the spatial cone and runs the two-sided maximal-cone
machinery.  A gap is only ever claimed with an exactly certified
separating functional; at small hierarchy levels the expected outcome
here is UNDECIDED, with the residual inner/outer gaps reported for each
candidate.  Against any full C*-algebra partner the probe short-circuits:
no gap can exist.
"""

from opsyskit import nuclearity_gap_probe
from opsyskit.gallery import diagonal_algebra, matrix_algebra, partial_matrix_system


def main():
    S7 = partial_matrix_system()
    print(f"system: {S7.name}, dimension {S7.dim} inside M3\n")

    print("against the full algebra M2 (nuclear partner):")
    rep = nuclearity_gap_probe(S7, matrix_algebra(2), budget=1, rng=0)
    print(f"  verdict: {rep['verdict']} ({rep.get('reason')})\n")

    print("against the diagonal algebra (nuclear partner):")
    rep = nuclearity_gap_probe(S7, diagonal_algebra(3), budget=1, rng=0)
    print(f"  verdict: {rep['verdict']} ({rep.get('reason')})\n")

    print("against itself, exploratory (this may take a minute):")
    rep = nuclearity_gap_probe(S7, S7, levels=(1,), budget=3, rng=0)
    print(f"  verdict: {rep['verdict']}")
    for cand in rep["candidates"]:
        worst = cand.get("worst_candidate_value")
        lv = {k: v["status"] for k, v in cand["levels"].items()}
        print(f"  trial {cand['trial']}: {lv}, best separating value "
              f"{'n/a' if worst is None else f'{worst:.3f}'} (uncertified)")
    if rep["certified_gap"] is None:
        print("  no certified gap at this level; candidates remain candidates")


if __name__ == "__main__":
    main()
