"""Show an obstructed extension on P^1 x P^1 and a control choice that extends."""

from nccech.deform import run_tower
from nccech.examples import p1xp1_line_bundle, p1xp1_spec
from nccech.qcoh import direct_sum, twist
from nccech.scheme import DeformationTower


def main():
    T = DeformationTower.from_spec(p1xp1_spec(), 3)
    S = T.level(1)
    F = direct_sum([p1xp1_line_bundle(S, 0, 0), twist(p1xp1_line_bundle(S, -2, 0), (-1, 0)),
                    twist(p1xp1_line_bundle(S, -2, -2), (-1, -1))], name="F")
    for choice in ([1, 1], [1, 0]):
        run = run_tower(T, F, choices={1: choice}, flatness=False)
        last = run.levels[-1]
        print("level-1 class %s: success=%s, last step k[t]/t^%d -> k[t]/t^%d, solvable=%s" % (
            choice, run.success, last.level, last.level + 1, last.obstruction.solvable))
        if last.obstruction.h2_certificate is not None:
            print("  H^2 certificate keys:", sorted(last.obstruction.h2_certificate))


if __name__ == "__main__":
    main()
