"""Command line interface.

    edge-arm add [PATH]                 register and deploy an application
    edge-arm exec [APP|--all]           run a reasoning step
    edge-arm rm [APP|--all]             remove one or all applications
    edge-arm status                     desired vs current placement per app
    edge-arm watcher start|stop|restart|status
    edge-arm scenario --nodes N --apps A --ticks T --seed S --strategy cr|ex

All commands accept a global ``--config FILE`` pointing at the YAML
configuration; without it every setting takes its default and state lives in
``./.edge-arm``.
"""

from __future__ import annotations

import argparse
import os
import signal
import subprocess
import sys
import time

from .config import OrchestratorConfig, load_config
from .errors import EdgeArmError, MissingDescriptor, UnknownApp, WatcherAlreadyRunning, WatcherNotRunning
from .runtime import Runtime, StateLock
from .scenario import ScenarioConfig, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edge-arm", description=__doc__.splitlines()[0])
    parser.add_argument("--config", metavar="FILE", default=None, help="global configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_add = sub.add_parser("add", help="deploy an application for the first time")
    p_add.add_argument("path", nargs="?", default=".", help="application directory (default: cwd)")

    p_exec = sub.add_parser("exec", help="run a reasoning step")
    p_exec.add_argument("target", nargs="?", default=None, help="app id or path")
    p_exec.add_argument("--all", action="store_true", help="reason over all applications")

    p_rm = sub.add_parser("rm", help="remove applications")
    p_rm.add_argument("target", nargs="?", default=None, help="app id or path")
    p_rm.add_argument("--all", action="store_true", help="remove all applications")

    sub.add_parser("status", help="desired vs current placement per application")

    p_w = sub.add_parser("watcher", help="control the watcher daemon")
    p_w.add_argument("action", choices=["start", "stop", "restart", "status"])
    p_w.add_argument(
        "--foreground", action="store_true", help="run in the foreground instead of detaching"
    )

    p_s = sub.add_parser("scenario", help="run a seeded end-to-end scenario")
    p_s.add_argument("--nodes", type=int, required=True)
    p_s.add_argument("--apps", type=int, required=True)
    p_s.add_argument("--ticks", type=int, required=True)
    p_s.add_argument("--seed", type=int, required=True)
    p_s.add_argument("--strategy", choices=["cr", "ex", "continuous", "exhaustive-restart"], default="cr")
    p_s.add_argument("--regions", type=int, default=3)
    p_s.add_argument("--commit-p", type=float, default=0.15)
    p_s.add_argument("--out", metavar="FILE", default=None, help="JSON-lines log (default: stdout)")
    p_s.add_argument("--csv", metavar="FILE", default=None, help="one-row CSV summary")
    p_s.add_argument(
        "--measure-time",
        action="store_true",
        help="record wall-clock decision times (logs are no longer byte-reproducible)",
    )
    return parser


def _resolve_target(core, target: str | None, use_all: bool) -> list[str]:
    if use_all:
        return core.managed_apps()
    if target is None:
        raise UnknownApp("specify an app id, a path, or --all")
    if target in core.apps:
        return [target]
    app_id = os.path.basename(os.path.abspath(target))
    if app_id in core.apps:
        return [app_id]
    raise UnknownApp(f"unknown app {target!r}")


def _snapshot(runtime: Runtime):
    report = runtime.ensure_report()
    if report is None:
        raise EdgeArmError(
            "no infrastructure report available; enable the simulated world or start the daemon"
        )
    return runtime.watcher.latest_snapshot()


def cmd_add(config: OrchestratorConfig, path: str) -> int:
    from . import descriptors

    path = os.path.abspath(path)
    compose = os.path.join(path, descriptors.COMPOSE_FILE)
    if not os.path.exists(compose):
        raise MissingDescriptor(f"{path} does not contain {descriptors.COMPOSE_FILE}")
    app_id = os.path.basename(path.rstrip("/"))
    with StateLock(config.state_dir):
        runtime = Runtime(config)
        runtime.core.register(app_id, path=path)
        snapshot = _snapshot(runtime)
        outcome = runtime.core.reconcile_app(app_id, snapshot)
        runtime.save_state()
    if outcome.action == "unplaceable":
        print(f"{app_id}: unplaceable under the current infrastructure", file=sys.stderr)
        return 1
    placement = runtime.core.apps[app_id].desired
    print(f"added {app_id}:")
    for sid, node in sorted(placement.assignment.items()):
        print(f"  {sid} -> {node}")
    return 0


def cmd_exec(config: OrchestratorConfig, target: str | None, use_all: bool) -> int:
    with StateLock(config.state_dir):
        runtime = Runtime(config)
        apps = _resolve_target(runtime.core, target, use_all)
        snapshot = _snapshot(runtime)
        total_actions = 0
        for app_id in apps:
            outcome = runtime.core.reconcile_app(app_id, snapshot)
            if outcome.plan is not None and not outcome.plan.is_empty():
                total_actions += len(outcome.plan.deploy) + len(outcome.plan.migrate) + len(
                    outcome.plan.remove
                )
                for sid, node in outcome.plan.deploy:
                    print(f"{app_id}: deploy {sid} -> {node}")
                for sid, src, dst in outcome.plan.migrate:
                    print(f"{app_id}: migrate {sid} {src} -> {dst}")
                for sid in outcome.plan.remove:
                    print(f"{app_id}: remove {sid}")
            elif outcome.action == "unplaceable":
                print(f"{app_id}: unplaceable, previous placement kept", file=sys.stderr)
        runtime.save_state()
    if total_actions == 0:
        print("no actions")
    return 0


def cmd_rm(config: OrchestratorConfig, target: str | None, use_all: bool) -> int:
    with StateLock(config.state_dir):
        runtime = Runtime(config)
        apps = _resolve_target(runtime.core, target, use_all)
        for app_id in apps:
            runtime.core.remove_app(app_id)
            print(f"removed {app_id}")
        runtime.save_state()
    return 0


def cmd_status(config: OrchestratorConfig) -> int:
    runtime = Runtime(config)
    statuses = runtime.core.statuses()
    if not statuses:
        print("no applications managed")
        return 0
    for status in statuses:
        match = "match" if status.match else "MISMATCH"
        degraded = " degraded" if status.degraded else ""
        print(f"{status.app_id}: {match}{degraded} (uptime {status.uptime_s:.0f}s)")
        for sid in sorted(set(status.desired) | set(status.current)):
            print(
                f"  {sid}: desired={status.desired.get(sid, '-')} "
                f"current={status.current.get(sid, '-')}"
            )
    return 0


def _watcher_pid(config: OrchestratorConfig) -> int | None:
    try:
        with open(config.pid_path) as fh:
            pid = int(fh.read().strip())
    except (OSError, ValueError):
        return None
    try:
        os.kill(pid, 0)
    except OSError:
        return None
    return pid


def cmd_watcher(config: OrchestratorConfig, action: str, foreground: bool, config_path) -> int:
    pid = _watcher_pid(config)
    if action == "status":
        if pid is None:
            print("watcher: not running")
        else:
            print(f"watcher: running (pid {pid})")
        return 0
    if action in ("stop", "restart"):
        if pid is None and action == "stop":
            raise WatcherNotRunning("watcher is not running")
        if pid is not None:
            os.kill(pid, signal.SIGTERM)
            for _ in range(50):
                if _watcher_pid(config) is None:
                    break
                time.sleep(0.1)
            print("watcher: stopped")
        if action == "stop":
            return 0
    # start (or the start half of restart)
    if _watcher_pid(config) is not None:
        raise WatcherAlreadyRunning("watcher is already running")
    if foreground:
        os.makedirs(config.state_dir, exist_ok=True)
        with open(config.pid_path, "w") as fh:
            fh.write(str(os.getpid()))
        try:
            Runtime(config).serve_forever()
        finally:
            try:
                os.unlink(config.pid_path)
            except OSError:
                pass
        return 0
    argv = [sys.executable, "-m", "edgearm"]
    if config_path:
        argv += ["--config", config_path]
    argv += ["watcher", "start", "--foreground"]
    os.makedirs(config.state_dir, exist_ok=True)
    log_path = os.path.join(config.state_dir, "watcher.log")
    with open(log_path, "ab") as logfh:
        subprocess.Popen(argv, stdout=logfh, stderr=logfh, start_new_session=True)
    for _ in range(50):
        if _watcher_pid(config) is not None:
            print(f"watcher: started (pid {_watcher_pid(config)})")
            return 0
        time.sleep(0.1)
    print("watcher: start requested (pid file not seen yet)", file=sys.stderr)
    return 1


def cmd_scenario(config: OrchestratorConfig, args) -> int:
    scenario = ScenarioConfig(
        nodes=args.nodes,
        apps=args.apps,
        ticks=args.ticks,
        seed=args.seed,
        strategy=args.strategy,
        regions=args.regions,
        commit_p=args.commit_p,
        measure_time=args.measure_time,
    )
    log = run_scenario(scenario)
    payload = log.to_jsonl()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload.decode())
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(log.to_csv())
    summary = log.summary_row()
    print(
        f"# {summary['strategy']} seed={summary['seed']}: "
        f"{summary['migrations']} migrations, {summary['explored']} candidates explored",
        file=sys.stderr,
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "add":
            return cmd_add(config, args.path)
        if args.command == "exec":
            return cmd_exec(config, args.target, args.all)
        if args.command == "rm":
            return cmd_rm(config, args.target, args.all)
        if args.command == "status":
            return cmd_status(config)
        if args.command == "watcher":
            return cmd_watcher(config, args.action, args.foreground, args.config)
        if args.command == "scenario":
            return cmd_scenario(config, args)
        raise AssertionError(f"unhandled command {args.command}")
    except EdgeArmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
