import argparse
import sys
from typing import Optional

from src.config import configure_logging
from src.experiments.enums import OutputFormat, Suite
from src.experiments.service import cmd_run, cmd_sweep
from src.experiments.suites import cmd_check


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddle",
        description="Run proximal point and gradient schemes on minimax problems",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "trajectories from every configured start"),
        ("sweep", "repeat the runs over the values of the swept parameter"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="experiment TOML file")
        sub.add_argument("--out", default=None, help="output directory")
        sub.add_argument("--workers", type=int, default=None, help="worker processes")
        sub.add_argument("--seed", type=int, default=None, help="seed for random starts")
        sub.add_argument("--lyapunov", action="store_true", help="add the Lyapunov column")
        sub.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)

    check = commands.add_parser("check", help="run an invariant suite")
    # validated by cmd_check so an unknown name lists the suites and exits 1
    check.add_argument("suite", help=", ".join(s.value for s in Suite))
    check.add_argument("--out", default=None, help="report directory")
    check.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    if args.command == "check":
        return cmd_check(args.suite, out=args.out, seed=args.seed)

    command = cmd_run if args.command == "run" else cmd_sweep
    return command(
        args.config,
        out=args.out,
        workers=args.workers,
        seed=args.seed,
        lyapunov=args.lyapunov,
        fmt=OutputFormat(args.format) if args.format else None,
    )


if __name__ == "__main__":
    sys.exit(main())
