"""Extend O+O(1) along the trivial and quantum towers and O+O(-2) along the graded tower."""

import json

from nccech.coeff import Window
from nccech.deform import run_tower
from nccech.examples import p1_spec, quantum_spec, sum_of_line_bundles
from nccech.scheme import DeformationTower
from nccech.tilt import end_algebra, flatness_check


def summary(name, run):
    print("%-24s success=%s" % (name, run.success))
    for lv in run.levels:
        print("  level %d: delta=0 %-5s solvable=%-5s dim H1=%d" % (
            lv.level, not lv.obstruction.cocycle, lv.obstruction.solvable, lv.torsor.dim_h1))


def main():
    trivial = DeformationTower.from_spec(p1_spec(), 3)
    summary("trivial O+O(1)", run_tower(trivial, sum_of_line_bundles(trivial.level(1), [0, 1]), flatness=False))
    graded = DeformationTower.from_spec(p1_spec(t_weight=(1,)), 3)
    summary("graded O+O(-2)", run_tower(graded, sum_of_line_bundles(graded.level(1), [0, -2]), flatness=False))
    quantum = DeformationTower.from_spec(quantum_spec(), 3)
    F0 = sum_of_line_bundles(quantum.level(1), [0, 1])
    run = run_tower(quantum, F0, flatness=False)
    summary("quantum O+O(1)", run)
    W = Window.parse("-2:2,0:2")
    Wx = W.extend((0, 1), 2)
    rep = flatness_check(end_algebra(run.module, Wx), end_algebra(F0, Wx), W)
    print(json.dumps(rep.to_json(), indent=1, sort_keys=True))


if __name__ == "__main__":
    main()
