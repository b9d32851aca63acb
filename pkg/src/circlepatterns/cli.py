"""Command line interface: gen, boundary, solve, render, green, converge."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .errors import CirclePatternError

log = logging.getLogger("circlepatterns")


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _load_embedding(path):
    from .lattice import RhombicEmbedding
    return RhombicEmbedding.load(path)


def cmd_gen(args):
    from .lattice import (gen_grid_projection, gen_hexagonal, gen_square_grid,
                          lift_to_zd, check_monotone, penrose_plane)
    domain = _floats(args.domain)
    if args.lattice == "square":
        emb = gen_square_grid(domain, args.eps)
    elif args.lattice == "hex":
        emb = gen_hexagonal(domain, args.eps)
    else:
        d = args.dim
        if args.plane_basis:
            b = np.array(_floats(args.plane_basis))
            d = len(b) // 2
            basis = (b[:d], b[d:])
        else:
            basis = penrose_plane(d)
        if args.offset:
            offset = _floats(args.offset)
        else:
            offset = list(np.random.default_rng(0).uniform(0, 1, d))
        emb = gen_grid_projection(basis, offset, domain, args.eps, d=d)
    if args.seed_root is not None or args.lattice == "projection":
        lift = lift_to_zd(emb, args.seed_root)
        log.info("lift into Z^%d, monotone: %s", lift.dim, check_monotone(lift))
    emb.save(args.out)
    print(f"{args.lattice}: {emb.bq.n_faces} faces, "
          f"{len(emb.bq.white)} white, {len(emb.bq.black)} black -> {args.out}")


def cmd_boundary(args):
    from .harness import boundary_angles, boundary_radii, get_map
    emb = _load_embedding(args.pattern)
    gmap = get_map(args.map)
    if args.bc == "dirichlet":
        data = {str(k): v for k, v in boundary_radii(gmap, emb).items()}
    else:
        phi = boundary_angles(gmap, emb)
        white = emb.bq.interior_white
        z0 = int(white[len(white) // 2]) if len(white) else int(emb.bq.white[0])
        data = {"phi": {f"{z},{v}": a for (z, v), a in phi.items()},
                "anchor": [z0, float(emb.eps * abs(gmap.gprime(emb.pos[z0])))]}
    with open(args.out, "w") as fh:
        json.dump(data, fh)
    print(f"boundary data for {args.map} -> {args.out}")


def cmd_solve(args):
    from .bquad import derive_views
    from .layout import layout_pattern
    from .solver import (DirichletProblem, NeumannProblem, solve_dirichlet,
                         solve_neumann)
    emb = _load_embedding(args.pattern)
    with open(args.boundary) as fh:
        data = json.load(fh)
    if args.problem == "dirichlet":
        p = DirichletProblem(derive_views(emb.bq), emb.alpha,
                             {int(k): v for k, v in data.items()})
        r = solve_dirichlet(p, tol=args.tol)
    else:
        p = NeumannProblem(emb.bq, emb.alpha, data["phi"], tuple(data["anchor"]))
        r, _ = solve_neumann(p, tol=args.tol)
    out = {str(int(z)): float(r.values[z]) for z in emb.bq.white}
    with open(args.out, "w") as fh:
        json.dump(out, fh)
    print(f"{args.problem}: {r.method}, {r.iterations} iterations, "
          f"residual {r.residual:.2e} -> {args.out}")
    if args.pattern_out:
        cp = layout_pattern(emb.bq, emb.alpha, r)
        cp.save(args.pattern_out)


def cmd_render(args):
    from .layout import isoradial_pattern, pattern_from_dict
    from .lattice import RhombicEmbedding
    from .plotting import render_pattern
    with open(args.inp) as fh:
        data = json.load(fh)
    if "positions" in data:
        cp = isoradial_pattern(RhombicEmbedding.from_dict(data))
    else:
        cp = pattern_from_dict(data)
    render_pattern(cp, args.out, circles=not args.no_circles)
    print(f"rendered {cp.bq.n_faces} kites -> {args.out}")


def cmd_green(args):
    from .bquad import derive_views
    from .green import green_asymptotic, green_bounded, green_function
    from .lattice import lift_to_zd
    emb = _load_embedding(args.pattern)
    bq = emb.bq
    unit = emb.pos / emb.eps
    x0 = args.x0
    if args.targets:
        targets = [int(t) for t in args.targets.split(",")]
    else:
        d = np.abs(unit[bq.white] - unit[x0])
        targets = [int(z) for z in bq.white[d <= args.radius]]
    rows = []
    if args.mode == "integral":
        lift = lift_to_zd(emb)
        for x in targets:
            ev = green_function(lift, x0, x)
            rows.append((x, ev.value, ev.path_octant, ev.quadrature_error_estimate))
    elif args.mode == "asymptotic":
        for x in targets:
            val = green_asymptotic(unit[x0], unit[x]) if x != x0 else float("nan")
            rows.append((x, val, "", ""))
    else:
        if args.radius is None:
            raise SystemExit("--mode bounded needs --radius")
        g = green_bounded(derive_views(bq), emb.alpha, x0, args.radius, unit)
        rows = [(x, g[x], "", "") for x in targets if np.isfinite(g[x])]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "x", "y", "value", "octant", "error_estimate"])
        for x, val, m, err in rows:
            w.writerow([x, unit[x].real, unit[x].imag, val, m, err])
    print(f"{len(rows)} values -> {args.out}")


def cmd_converge(args):
    from .harness import ExperimentConfig, convergence_sweep
    cfg = ExperimentConfig(map_name=args.map, lattice=args.lattice, bc=args.bc,
                           eps_list=tuple(_floats(args.eps_list)),
                           margin=args.margin, csv_path=args.csv,
                           svg_dir=args.svg_dir,
                           domain=tuple(_floats(args.domain)) if args.domain else None)
    rep = convergence_sweep(cfg)
    print(f"{'eps':>10} {'err_q':>10} {'err_g':>10} {'err_t':>10} {'err_d1':>10}")
    for r in rep.rows:
        print(f"{r['eps']:10.5f} {r['err_q']:10.3e} {r['err_g']:10.3e} "
              f"{r['err_t']:10.3e} {r['err_d1']:10.3e}")
    print("slopes: " + ", ".join(f"{k}={v:.3f}" for k, v in rep.slopes.items()))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="circlepatterns", parents=[common],
                                description="Circle patterns approximating conformal maps")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a rhombic embedding")
    g.add_argument("--lattice", choices=["square", "hex", "projection"], default="square")
    g.add_argument("--eps", type=float, default=1 / 16)
    g.add_argument("--domain", default="1,0,2,1", help="x0,y0,x1,y1")
    g.add_argument("--plane-basis", help="2d floats: u_1..u_d v_1..v_d")
    g.add_argument("--offset", help="d floats")
    g.add_argument("--dim", type=int, default=5)
    g.add_argument("--seed-root", type=int, default=None,
                   help="white vertex placed at the origin of the Z^d lift")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("boundary", parents=[common], help="boundary data of a test map")
    b.add_argument("--pattern", required=True)
    b.add_argument("--map", default="square")
    b.add_argument("--bc", choices=["dirichlet", "neumann"], default="dirichlet")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_boundary)

    s = sub.add_parser("solve", parents=[common], help="solve a boundary value problem")
    s.add_argument("--problem", choices=["dirichlet", "neumann"], default="dirichlet")
    s.add_argument("--pattern", required=True)
    s.add_argument("--boundary", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", required=True)
    s.add_argument("--pattern-out", help="also write the laid out pattern")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("render", parents=[common], help="draw a pattern or embedding")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--no-circles", action="store_true")
    r.set_defaults(func=cmd_render)

    gr = sub.add_parser("green", parents=[common], help="discrete Green's function values")
    gr.add_argument("--pattern", required=True)
    gr.add_argument("--x0", type=int, required=True)
    tg = gr.add_mutually_exclusive_group(required=True)
    tg.add_argument("--targets")
    tg.add_argument("--radius", type=float)
    gr.add_argument("--mode", choices=["integral", "asymptotic", "bounded"],
                    default="integral")
    gr.add_argument("--out", required=True)
    gr.set_defaults(func=cmd_green)

    c = sub.add_parser("converge", parents=[common], help="convergence sweep")
    c.add_argument("--map", choices=["identity", "affine", "square", "exp", "inv",
                                     "moebius"], default="square")
    c.add_argument("--lattice", choices=["square", "hex", "projection"], default="square")
    c.add_argument("--bc", choices=["dirichlet", "neumann"], default="dirichlet")
    c.add_argument("--eps-list", default="0.125,0.0625,0.03125")
    c.add_argument("--margin", type=float, default=None)
    c.add_argument("--domain", default=None)
    c.add_argument("--csv", default=None)
    c.add_argument("--svg-dir", default=None)
    c.set_defaults(func=cmd_converge)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CirclePatternError, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
