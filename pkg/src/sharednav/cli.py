"""Command line entry point.

Serves the websocket bridge by default; with --headless it runs scripted
operator episodes and prints one JSON line per episode plus an aggregate.
Exit codes: 0 on success, 1 for configuration or scenario problems, 2 when
the port cannot be bound.
"""

from __future__ import annotations

import argparse
import sys

from sharednav.adaptation import ALPHA_SUPPORT, AdaptationBelief
from sharednav.loop import ServerConfig
from sharednav.scenario import InvalidScenario, ParseError, bundled_scenario_path, load_scenario_file


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # configuration faults exit 1, not argparse's default 2
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _parse_prior(text: str) -> AdaptationBelief:
    if text == "adaptable":
        return AdaptationBelief.adaptable()
    if text == "uniform":
        return AdaptationBelief.uniform()
    parts = text.split(",")
    if len(parts) == len(ALPHA_SUPPORT):
        try:
            return AdaptationBelief(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise _UsageError(f"bad prior: {exc}") from None
    raise _UsageError(
        "prior must be 'adaptable', 'uniform', or five comma-separated probabilities"
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="sharednav", description=__doc__)
    parser.add_argument("--port", type=int, default=8080, help="websocket port (default 8080)")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--scenario", default=None, help="scenario file (default: bundled two_corridor)")
    parser.add_argument("--dt", type=float, default=0.05, help="control period in seconds")
    parser.add_argument("--log", default=None, help="session log path (JSON lines)")
    parser.add_argument("--horizon", type=int, default=3, help="planning lookahead in steps")
    parser.add_argument("--k", type=int, default=20, help="observation window length")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--prior", default="adaptable",
                        help="'adaptable', 'uniform', or five comma-separated probabilities")
    parser.add_argument("--headless", action="store_true",
                        help="run scripted episodes instead of serving")
    parser.add_argument("--alpha-true", type=float, default=None,
                        help="scripted operator adaptability (headless)")
    parser.add_argument("--preferred", default="left", choices=("left", "right"),
                        help="scripted operator's corridor (headless)")
    parser.add_argument("--episodes", type=int, default=10,
                        help="number of scripted episodes (headless)")
    parser.add_argument("--report-dir", default=None,
                        help="write episodes.csv and figures here (headless)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        prior = _parse_prior(args.prior)
    except _UsageError as exc:
        print(f"sharednav: {exc}", file=sys.stderr)
        return 1

    scenario_path = args.scenario if args.scenario else str(bundled_scenario_path())
    try:
        scenario = load_scenario_file(scenario_path)
        config = ServerConfig(
            scenario=scenario,
            port=args.port,
            host=args.host,
            dt=args.dt,
            log_path=args.log,
            horizon=args.horizon,
            k=args.k,
            prior=prior,
            seed=args.seed,
        )
    except (ParseError, InvalidScenario, ValueError) as exc:
        print(f"sharednav: {exc}", file=sys.stderr)
        return 1

    if args.headless:
        if args.alpha_true is None:
            print("sharednav: --headless requires --alpha-true", file=sys.stderr)
            return 1
        from sharednav.headless import run_headless

        try:
            run_headless(
                config,
                alpha_true=args.alpha_true,
                preferred=args.preferred,
                episodes=args.episodes,
                report_dir=args.report_dir,
            )
        except (InvalidScenario, ValueError) as exc:
            print(f"sharednav: {exc}", file=sys.stderr)
            return 1
        return 0

    from sharednav.server import run_server

    return run_server(config)


if __name__ == "__main__":
    sys.exit(main())
