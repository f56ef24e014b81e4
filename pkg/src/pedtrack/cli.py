"""Command-line client for the tracking service.

Every subcommand builds the same request models the HTTP endpoints accept
and either posts them to ``--server URL`` or calls the service handlers
in-process, so batch runs need no running server.

Exit codes: 0 success, 1 usage, 2 data error, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
from fastapi import HTTPException
from pydantic import ValidationError

from . import __version__, service
from .synth import scenario_names

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ACCEPTANCE = 3

_KIND_EXIT = {"usage": EXIT_USAGE, "data": EXIT_DATA}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse maps usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _detail_to_error(status_code: int, detail) -> CliError:
    if isinstance(detail, dict) and "kind" in detail:
        kind = detail.get("kind")
        message = detail.get("message", str(detail))
        return CliError(message, _KIND_EXIT.get(kind, EXIT_DATA))
    if status_code in (400, 422):
        return CliError(str(detail), EXIT_USAGE)
    return CliError(f"server error {status_code}: {detail}", EXIT_DATA)


def _call(server: str | None, path: str, handler, request) -> dict:
    """POST to a remote server, or run the service handler in-process."""
    if server:
        try:
            resp = httpx.post(server.rstrip("/") + path,
                              json=request.model_dump(), timeout=600.0)
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach server {server}: {exc}", EXIT_DATA)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail")
            except ValueError:
                detail = resp.text
            raise _detail_to_error(resp.status_code, detail)
        return resp.json()
    try:
        return handler(request).model_dump()
    except HTTPException as exc:
        raise _detail_to_error(exc.status_code, exc.detail)


def _build_request(model_cls, **kwargs):
    try:
        return model_cls(**kwargs)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise CliError(first.get("msg", str(exc)), EXIT_USAGE)


def _cmd_synth(args) -> int:
    request = _build_request(service.SynthRequest, scenario=args.scenario,
                             out_dir=args.out_dir, seed=args.seed)
    result = _call(args.server, "/synth", service.synth, request)
    print(f"{result['scenario']}: wrote {result['frames_written']} frames "
          f"({result['width_px']}x{result['height_px']} @ {result['fps']:g} fps, "
          f"seed {result['seed']}) to {result['out_dir']}")
    print(f"ground truth: {result['ground_truth_path']}")
    return EXIT_OK


def _cmd_track(args) -> int:
    request = _build_request(service.TrackRequest, config_path=args.config,
                             preset=args.preset, out_dir=args.out)
    result = _call(args.server, "/track", service.track, request)
    print(f"run {result['run_name']}: {result['frames_processed']} frames, "
          f"{result['tracks_created']} tracks created, "
          f"{result['tracks_terminated']} terminated, "
          f"{result['wall_time_s']:.2f} s")
    for name in result["outputs"]:
        print(f"  {name}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    request = _build_request(service.VerifyRequest, config_path=args.config,
                             preset=args.preset, out_dir=args.out,
                             truth_path=args.truth)
    result = _call(args.server, "/verify", service.verify, request)
    for actor in result["actors"]:
        if actor["matched"]:
            print(f"actor {actor['actor_id']} -> track {actor['track_id']}: "
                  f"rmse {actor['rmse_px']:.3f} px, "
                  f"coverage {actor['coverage']:.3f}, "
                  f"speed err {actor['speed_error_pct']:.2f}%, "
                  f"{actor['id_switches']} switches")
        else:
            print(f"actor {actor['actor_id']}: UNMATCHED")
    for failure in result["failures"]:
        print(f"FAIL: {failure}")
    print(f"report: {result['report_path']}")
    if result["passed"]:
        print(f"verify PASSED ({result['n_actors']} actors, "
              f"{result['n_tracks']} tracks)")
        return EXIT_OK
    print("verify FAILED")
    return EXIT_ACCEPTANCE


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(service.app, host=args.host, port=args.port)
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    if args.server:
        try:
            resp = httpx.get(args.server.rstrip("/") + "/scenarios", timeout=60.0)
            resp.raise_for_status()
            result = resp.json()
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach server {args.server}: {exc}", EXIT_DATA)
    else:
        result = [s.model_dump() for s in service.scenarios()]
    print(json.dumps(result, indent=2))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="pedtrack",
                     description="Overhead pedestrian tracking pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--server", metavar="URL", default=None,
                        help="send requests to a running pedtrack server "
                             "instead of running in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic scenario to frames")
    p.add_argument("scenario",
                   help=f"builtin name ({', '.join(scenario_names())}) "
                        "or scenario script path")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=None,
                   help="override the script seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("track", help="track a frame sequence and emit outputs")
    p.add_argument("--config", required=True)
    p.add_argument("--preset", default=None,
                   help="detection preset override (s1..s4 or scenario1..4)")
    p.add_argument("--out", default=None, help="output directory override")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("verify", help="track, then compare to ground truth")
    p.add_argument("--config", required=True)
    p.add_argument("--truth", required=True, help="ground truth CSV path")
    p.add_argument("--preset", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scenarios", help="list builtin scenarios")
    p.set_defaults(func=_cmd_scenarios)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
