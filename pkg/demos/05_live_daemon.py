"""Walkthrough: the full daemon loop in one process.

Registers an application, lets the watcher close the loop over a live
(simulated) infrastructure with perturbation enabled, and steers it through
the command queue like the dashboard would.

Run with: python demos/05_live_daemon.py
"""

import os
import tempfile
import textwrap
import time

from edgearm.config import load_config
from edgearm.runtime import Runtime
from edgearm.watcher import Command

COMPOSE = """\
services:
  web:
    image: demo/web:1
  api:
    image: demo/api:1
"""

REQUIREMENTS = """\
services:
  web:
    hardware: 400
    links:
      api:
        bandwidth: 20
        latency: 300
  api:
    hardware: 600
"""


def main():
    with tempfile.TemporaryDirectory() as tmp:
        app_dir = os.path.join(tmp, "demoapp")
        os.makedirs(app_dir)
        with open(os.path.join(app_dir, "docker-compose.yml"), "w") as fh:
            fh.write(COMPOSE)
        with open(os.path.join(app_dir, "requirements.yml"), "w") as fh:
            fh.write(REQUIREMENTS)
        config_path = os.path.join(tmp, "config.yml")
        with open(config_path, "w") as fh:
            fh.write(
                textwrap.dedent(
                    f"""\
                    state_dir: {tmp}/state
                    simulation:
                      enabled: true
                      nodes: 9
                      regions: 3
                      perturb: true
                    """
                )
            )
        config = load_config(config_path)
        runtime = Runtime(config)
        runtime.ensure_report()
        runtime.core.register("demoapp", path=app_dir)
        runtime.watcher.poll_once()
        print("initial placement:", runtime.core.status("demoapp").desired)

        print("\nriding 12 perturbation periods with the watcher in the loop...")
        migrations = 0
        for period in range(12):
            runtime.pump_monitor()
            steps = runtime.watcher.poll_once()
            status = runtime.core.status("demoapp")
            if steps:
                print(f"  period {period}: reasoning ran, placement {status.desired}")
        print("\nsteering through the operator queue (like the dashboard Save button):")
        tighter = REQUIREMENTS.replace("hardware: 600", "hardware: 900")
        runtime.watcher.queue.enqueue(Command("update_files", "demoapp", requirements=tighter))
        runtime.watcher.queue.enqueue(Command("exec_app", "demoapp"))
        runtime.watcher.poll_once()
        print("  new placement:", runtime.core.status("demoapp").desired)
        runtime.save_state()
        print("\nstate persisted under", config.state_dir)


if __name__ == "__main__":
    main()
