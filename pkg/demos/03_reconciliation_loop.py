"""Walkthrough: diff-based reconciliation and the command-script backend.

Every decision becomes the three action lists (deploy, migrate, remove) and,
with the command-script backend, the exact docker command lines that a real
cluster would receive.

Run with: python demos/03_reconciliation_loop.py
"""

import os
import tempfile

from edgearm.model import ApplicationSpec, InfrastructureSnapshot, LinkState, NodeState, ServiceRequirement
from edgearm.orchestrator import Core
from edgearm.reconciler import CommandScriptBackend, diff, render_commands
from edgearm.model import Placement


def world():
    nodes = {f"vm{i}": NodeState(f"vm{i}", 1000) for i in (1, 2, 3)}
    links = {}
    for a in nodes:
        for b in nodes:
            if a != b:
                links[(a, b)] = LinkState(a, b, 10.0, 500.0)
    return InfrastructureSnapshot(nodes, links, timestamp=1)


def spec(app_id, **hw):
    return ApplicationSpec(
        app_id, services={s: ServiceRequirement(s, hardware=v) for s, v in hw.items()}
    )


def main():
    print("-- the three lists --")
    old = Placement("shop", {"web": "vm1", "cart": "vm2", "db": "vm3"})
    new = Placement("shop", {"web": "vm1", "cart": "vm3", "search": "vm2"})
    plan = diff(old, new)
    print("deploy: ", plan.deploy)
    print("migrate:", plan.migrate)
    print("remove: ", plan.remove)
    print("\nrendered command lines:")
    for line in render_commands(plan):
        print(" ", line)

    print("\n-- a full reconcile tick through the command-script backend --")
    with tempfile.TemporaryDirectory() as tmp:
        script = os.path.join(tmp, "commands.sh")
        core = Core(backend=CommandScriptBackend(script))
        core.register("shop", spec=spec("shop", web=100, cart=150, db=200))
        core.reconcile_tick(world(), tick=0)
        core.set_spec("shop", spec("shop", web=100, cart=150, search=80))  # a commit
        core.reconcile_tick(world(), tick=1)
        core.remove_app("shop")
        print(open(script).read())


if __name__ == "__main__":
    main()
