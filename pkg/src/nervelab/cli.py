"""Command-line front end.

Every command writes JSON lines, one per check, followed by a summary
object.  Exit codes: 0 all checks pass, 1 a check failed, 2 bad input,
3 a cap or search budget was exhausted.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from math import comb
from pathlib import Path

from .caps import DEFAULTS, parse_caps
from .errors import BudgetExhausted, CapExceeded, NervelabError, NoPullback, PreconditionError, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class Report:
    """Collects check lines and renders them as JSON lines."""

    def __init__(self, command: str, seed: int):
        self.command = command
        self.seed = seed
        self.lines: list[dict] = []

    def check(self, name: str, ok: bool, **data) -> bool:
        self.lines.append({"check": name, "pass": bool(ok), **data})
        return bool(ok)

    def info(self, name: str, **data) -> None:
        self.lines.append({"info": name, **data})

    @property
    def passed(self) -> bool:
        return all(line.get("pass", True) for line in self.lines)

    def summary(self, status: str, **data) -> dict:
        checks = [line for line in self.lines if "check" in line]
        return {
            "summary": True,
            "command": self.command,
            "status": status,
            "checks": len(checks),
            "failed": [line["check"] for line in checks if not line["pass"]],
            "seed": self.seed,
            **data,
        }

    def render(self, summary: dict) -> str:
        out = [json.dumps(line, sort_keys=True, default=_default) for line in self.lines]
        out.append(json.dumps(summary, sort_keys=True, default=_default))
        return "\n".join(out) + "\n"


def _default(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x, key=repr)
    if isinstance(x, tuple):
        return list(x)
    return repr(x)


@contextmanager
def _caps_env(overrides: list[str]):
    """Apply ``--cap KEY=VALUE`` flags on top of ``NERVELAB_CAPS`` for one run."""
    old = os.environ.get("NERVELAB_CAPS")
    merged = parse_caps(old or "")
    for item in overrides:
        merged.update(parse_caps(item))
    os.environ["NERVELAB_CAPS"] = ",".join(f"{k}={v}" for k, v in sorted(merged.items()))
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("NERVELAB_CAPS", None)
        else:
            os.environ["NERVELAB_CAPS"] = old


def _load_model(spec: str):
    from .toys import bundled, model_from_json

    path = Path(spec)
    if path.is_file():
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ValidationError(f"{spec}: not valid JSON ({e})") from None
        return model_from_json(doc)
    name = path.name[:-5] if path.name.endswith(".json") else path.name
    return bundled(name)


def _class(model, name: str):
    from .fincat import EdgeClass

    if name in model.classes:
        return model.classes[name]
    if name == "ALL":
        return EdgeClass.all(model.category, "ALL")
    if name == "ISO":
        return EdgeClass.isos(model.category, "ISO")
    raise ValidationError(f"category file defines no class {name!r} (known: {', '.join(sorted(model.classes))})")


def _split(text: str | None) -> list[str]:
    return [s.strip() for s in (text or "").split(",") if s.strip()]


# ---------------------------------------------------------------- commands


def cmd_lattice(args, rep: Report) -> None:
    from .poset import crt, crt_dot, crt_size, lattice_to_json

    L = crt(args.n)
    rep.check("crt size", len(L) == crt_size(args.n), n=args.n, size=len(L), expected=crt_size(args.n))
    rep.info(
        "crt",
        n=args.n,
        covers=len(L.covers),
        bottom=L.bitstring(L.bottom),
        top=L.bitstring(L.top),
        grid_image=[L.bitstring(x) for x in sorted(L.sigma_image)],
    )
    if args.dot:
        Path(args.dot).write_text(crt_dot(L))
        rep.info("dot written", path=args.dot)
    if args.json:
        Path(args.json).write_text(json.dumps(lattice_to_json(L), indent=1, sort_keys=True) + "\n")
        rep.info("json written", path=args.json)


def _certificate(rep: Report, name: str, build, n: int, args) -> None:
    from .certify import verify_certificate

    cert = build(n, max_attempts=args.max_attempts, max_seconds=args.max_seconds)
    verdict = verify_certificate(cert)
    rep.check(
        name,
        verdict.ok,
        n=n,
        moves=len(cert),
        stages=sorted({mv.stage for mv in cert.moves}),
        stats=cert.stats,
        failure=None if verdict.ok else {"index": verdict.failure_index, "reason": verdict.reason},
    )
    if args.certificate:
        Path(args.certificate).write_text(json.dumps(cert.to_json(), sort_keys=True) + "\n")
        rep.info("certificate written", path=args.certificate)


def cmd_verify(args, rep: Report) -> None:
    from .certify import cert_box_in_ccpt, cert_boxplus_cover
    from .poset import crt

    if args.what == "cpt-inner":
        _certificate(rep, "box inside CCpt inner anodyne", cert_box_in_ccpt, args.n, args)
    elif args.what == "cart-cover":
        _certificate(rep, "boxplus cover inside Cart inner anodyne", cert_boxplus_cover, args.n, args)
    else:
        for n in range(args.max + 1):
            size = len(crt(n))
            expected = comb(2 * n + 2, n + 1) - 1
            rep.check("crt count", size == expected, n=n, count=size, expected=expected)


def cmd_komp(args, rep: Report) -> None:
    from .fincat import is_filtered
    from .homology import contractibility_evidence
    from .multinerve import komp_category
    from .simplicial import nerve

    model = _load_model(args.cat)
    C = model.category
    K = komp_category(C, _class(model, args.e1), _class(model, args.e2), args.sigma, args.alpha)
    rep.info("komp", sigma=args.sigma, **K.summary())
    checks = set(_split(args.checks))
    unknown = checks - {"filtered", "homology", "nonempty"}
    if unknown:
        raise ValidationError(f"unknown checks: {', '.join(sorted(unknown))}")
    rep.check("nonempty", len(K.functors) > 0, objects=len(K.functors))
    op = K.category.opposite()
    if "filtered" in checks:
        ok, witness = is_filtered(op)
        rep.check("opposite is filtered", ok, filtered=ok, witness=None if ok else witness)
    if "homology" in checks:
        X = nerve(op, args.max_dim + 1)
        ev = contractibility_evidence(X, args.max_dim, op)
        rep.check(
            "contractibility evidence",
            ev.verdict == "CONE" or ev.verdict.startswith("ACYCLIC"),
            verdict=ev.verdict,
            homology=ev.to_json(),
        )


def cmd_glue(args, rep: Report) -> None:
    from .multinerve import RestrictedNerve, all_chains, check_gluing, compactifications

    model = _load_model(args.cat)
    C = model.category
    names = _split(args.classes)
    if len(names) < 2:
        raise ValidationError("--classes needs at least E1,E2")
    twist = [int(t) for t in _split(args.twist)]
    if 1 in twist or 2 in twist:
        raise ValidationError("twisted directions must not include 1 or 2")
    if any(t > len(names) or t < 1 for t in twist):
        raise ValidationError(f"twist directions must lie in 3..{len(names)}")
    classes = [_class(model, n) for n in names]
    E0 = _class(model, args.target) if args.target else (model.classes.get("E0") or _class(model, "ALL"))
    source = RestrictedNerve(C, classes)
    target = RestrictedNerve(C, [E0] + classes[2:])
    result = check_gluing(source, target, args.max_dim, twist)
    for row in result["rows"]:
        rep.check(row["condition"], row["pass"], **{k: v for k, v in row.items() if k not in ("condition", "pass")})
    empty = [
        [C.names[m] for m in ch.maps]
        for ch in all_chains(C, 1, E0)
        if not compactifications(C, classes[0], classes[1], ch)
    ]
    rep.check("every 1-simplex has a compactification", not empty, witness=empty[:1] or None)


def cmd_hypotheses(args, rep: Report) -> None:
    from .multinerve import check_descent_hypotheses, check_gluing_hypotheses

    model = _load_model(args.cat)
    C = model.category
    E0, E1, E2 = (_class(model, n) for n in ("E0", "E1", "E2"))
    others = {n: _class(model, n) for n in _split(args.others)}
    rows = []
    if args.mode in ("descent", "combine"):
        rows += [dict(r, group="descent") for r in check_descent_hypotheses(C, E0, E1, E2, others)]
    if args.mode in ("gluing", "combine"):
        rows += [dict(r, group="gluing") for r in check_gluing_hypotheses(C, E1, E2, model.chain, others, E0)]
    for row in rows:
        rep.check(row["condition"], row["pass"], **{k: v for k, v in row.items() if k not in ("condition", "pass")})


def _complex(spec: str, D: int):
    from .poset import FinPoset, crt
    from .simplicial import TruncSSet, nerve, standard_complex

    head, _, rest = spec.partition(":")
    nums = [int(x) for x in rest.split(":")] if rest else []
    if head in ("simplex", "boundary") and len(nums) == 1:
        return standard_complex(head, nums[0], D=max(D + 1, nums[0])), None
    if head == "horn" and len(nums) == 2:
        return standard_complex("horn", nums[0], nums[1], D=max(D + 1, nums[0])), None
    if head == "ccpt" and len(nums) == 1:
        P = FinPoset.rcpt(nums[0])
        return nerve(P, D + 1), P
    if head == "crt" and len(nums) == 1:
        P = crt(nums[0]).poset
        return nerve(P, D + 1), P
    path = Path(spec)
    if not path.is_file():
        model = _load_model(spec)
        return nerve(model.category, D + 1), model.category
    doc = json.loads(path.read_text())
    if "simplices" in doc and "faces" in doc:
        return TruncSSet.from_json(doc), None
    if "elements" in doc:
        P = FinPoset.from_json(doc)
        return nerve(P, D + 1), P
    model = _load_model(spec)
    return nerve(model.category, D + 1), model.category


def cmd_homology(args, rep: Report) -> None:
    from .homology import contractibility_evidence

    X, source = _complex(args.complex, args.max_dim)
    D = min(args.max_dim, X.max_dim)
    ev = contractibility_evidence(X, D, source)
    data = ev.to_json()
    data["reduced_betti"] = [ev.reduced_betti(n) for n in range(len(ev.betti))]
    if args.expect:
        rep.check("expected verdict", ev.verdict == args.expect, expected=args.expect, **data)
    else:
        rep.info("homology", **data)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nervelab", description="Finite checks for restricted nerves, compactifications and lattices of up-sets.")
    p.add_argument("--report", help="also write the JSON-lines report to this file")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument(
        "--cap",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a size cap; known keys: " + ", ".join(f"{k}={v}" for k, v in DEFAULTS.items()),
    )
    sub = p.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", help="lattices of up-sets")
    lat.add_argument("kind", choices=["crt"])
    lat.add_argument("-n", type=int, required=True)
    lat.add_argument("--dot", help="write the Hasse diagram here")
    lat.add_argument("--json", help="write the lattice as JSON here")
    lat.set_defaults(func=cmd_lattice)

    ver = sub.add_parser("verify", help="certificates and counts")
    ver.add_argument("what", choices=["cpt-inner", "cart-cover", "crt-counts"])
    ver.add_argument("-n", type=int, default=1)
    ver.add_argument("--max", type=int, default=4, help="largest n for crt-counts")
    ver.add_argument("--max-attempts", type=int, default=DEFAULTS["CERT_ATTEMPTS"])
    ver.add_argument("--max-seconds", type=float, default=DEFAULTS["CERT_SECONDS"])
    ver.add_argument("--certificate", help="write the certificate JSON here")
    ver.set_defaults(func=cmd_verify)

    kp = sub.add_parser("komp", help="category of compactifications of a chain")
    kp.add_argument("--cat", required=True, help="category JSON file or bundled model name")
    kp.add_argument("--sigma", required=True, help="object name or comma-separated composable morphisms")
    kp.add_argument("--alpha", type=int, choices=[1, 2], default=1)
    kp.add_argument("--checks", default="filtered,homology")
    kp.add_argument("--e1", default="E1")
    kp.add_argument("--e2", default="E2")
    kp.add_argument("--max-dim", type=int, default=4)
    kp.set_defaults(func=cmd_komp)

    gl = sub.add_parser("glue", help="check the gluing map on restricted nerves")
    gl.add_argument("--cat", required=True)
    gl.add_argument("--classes", required=True, help="E1,E2[,Ek...]")
    gl.add_argument("--twist", default="", help="comma-separated twisted directions (3 or more)")
    gl.add_argument("--target", help="class for the glued direction (default E0 or all morphisms)")
    gl.add_argument("--max-dim", type=int, default=3)
    gl.set_defaults(func=cmd_glue)

    hy = sub.add_parser("hypotheses", help="check the descent or gluing hypotheses on a category with classes")
    hy.add_argument("--cat", required=True)
    hy.add_argument("--mode", choices=["descent", "gluing", "combine"], default="combine")
    hy.add_argument("--others", default="", help="extra classes E3,E4,... for stability checks")
    hy.set_defaults(func=cmd_hypotheses)

    ho = sub.add_parser("homology", help="integral homology and contractibility evidence")
    ho.add_argument("--complex", required=True, help="JSON file, bundled model, or simplex:N, boundary:N, horn:N:K, ccpt:N, crt:N")
    ho.add_argument("--max-dim", type=int, default=4)
    ho.add_argument("--expect", help="expected verdict, e.g. CONE")
    ho.set_defaults(func=cmd_homology)
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    rep = Report(args.command if args.command != "verify" else f"verify {args.what}", args.seed)
    status, code, extra = "pass", EXIT_OK, {}
    try:
        with _caps_env(args.cap):
            args.func(args, rep)
        if not rep.passed:
            status, code = "fail", EXIT_FAIL
    except (CapExceeded, BudgetExhausted) as e:
        status, code = "budget", EXIT_BUDGET
        extra = {"error": str(e), "stats": getattr(e, "stats", None)}
    except (ValidationError, PreconditionError, NoPullback, OSError, json.JSONDecodeError, ValueError) as e:
        status, code = "input-error", EXIT_INPUT
        extra = {"error": str(e)}
    except NervelabError as e:
        status, code = "fail", EXIT_FAIL
        extra = {"error": str(e)}
    text = rep.render(rep.summary(status, **extra))
    stdout.write(text)
    if args.report:
        Path(args.report).write_text(text)
    return code


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
