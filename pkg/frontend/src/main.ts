/** Browser bootstrap: mounts the two pages, polls the gateway, and wires the
 * panel buttons. All state transitions live in state.ts; all markup in
 * render.ts. */

import { ApiClient } from "./api.js";
import {
  renderAppDetail,
  renderComposeEditor,
  renderConnectionBanner,
  renderLinkDetail,
  renderLinkHistory,
  renderNodeApplications,
  renderNodeDetail,
  renderNodesOverview,
  renderOverview,
  renderRequirementsEditor,
  renderStatistics,
} from "./render.js";
import { AppsPage, NodesPage } from "./state.js";

const POLL_INTERVAL_MS = 2000;

const api = new ApiClient("");
const appsPage = new AppsPage();
const nodesPage = new NodesPage();
let activePage: "applications" | "nodes" = "applications";

function root(): HTMLElement {
  return document.getElementById("root")!;
}

function draw(): void {
  const banner = renderConnectionBanner(
    activePage === "applications" ? appsPage.connectionLost : nodesPage.connectionLost,
  );
  const tabs = `
    <nav class="tabs">
      <button class="tab ${activePage === "applications" ? "active" : ""}" data-action="page-applications">Applications</button>
      <button class="tab ${activePage === "nodes" ? "active" : ""}" data-action="page-nodes">Nodes</button>
    </nav>`;
  const body =
    activePage === "applications"
      ? `<div class="grid">
           ${renderStatistics(appsPage)}
           ${renderOverview(appsPage)}
           ${renderComposeEditor(appsPage)}
           ${renderRequirementsEditor(appsPage)}
           ${renderAppDetail(appsPage)}
         </div>`
      : `<div class="grid">
           ${renderNodesOverview(nodesPage)}
           ${renderNodeDetail(nodesPage)}
           ${renderLinkDetail(nodesPage)}
           ${renderLinkHistory(nodesPage)}
           ${renderNodeApplications(nodesPage, appsPage.apps)}
         </div>`;
  root().innerHTML = banner + tabs + body;
}

async function poll(): Promise<void> {
  try {
    appsPage.applyApps(await api.listApps());
    appsPage.serviceHistory = (await api.serviceHistory()).history;
    if (appsPage.selected) {
      appsPage.applyDetail(await api.appDetail(appsPage.selected));
    }
    nodesPage.applyInfra(await api.infra());
    if (nodesPage.selectedNode) {
      nodesPage.applyNodeDetail(await api.nodeDetail(nodesPage.selectedNode));
    }
    if (nodesPage.selectedLink) {
      try {
        nodesPage.applyLinkDetail(
          await api.linkDetail(nodesPage.selectedLink[0], nodesPage.selectedLink[1]),
        );
      } catch {
        nodesPage.linkDetail = null; // unknown link: render the empty state
      }
    }
  } catch {
    appsPage.connectionLost = true;
    nodesPage.connectionLost = true;
  }
  draw();
}

function wireEvents(): void {
  root().addEventListener("click", async (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action!;
    if (action === "page-applications") activePage = "applications";
    if (action === "page-nodes") activePage = "nodes";
    if (action === "select-app") {
      appsPage.select(target.dataset.app ?? null);
      if (appsPage.selected) {
        appsPage.applyDetail(await api.appDetail(appsPage.selected));
      }
    }
    if (action === "save") {
      await appsPage.save(api);
    }
    if (action === "refresh-editor") {
      appsPage.refreshEditor(target.dataset.editorName as "compose" | "requirements");
    }
    if (action === "cancel-editor") {
      appsPage.cancelEditor(target.dataset.editorName as "compose" | "requirements");
    }
    if (action === "exec-app" && appsPage.selected) {
      await api.execApp(appsPage.selected);
    }
    if (action === "remove-app" && appsPage.selected) {
      await api.removeApp(appsPage.selected);
      appsPage.select(null);
    }
    draw();
  });

  // textarea edits must not trigger a full redraw (the operator is typing)
  root().addEventListener("input", (event) => {
    const target = event.target as HTMLTextAreaElement;
    if (target.dataset.editor) {
      appsPage.edit(target.dataset.editor as "compose" | "requirements", target.value);
    }
  });

  root().addEventListener("change", async (event) => {
    const target = event.target as HTMLSelectElement;
    const action = target.dataset.action;
    if (action === "select-node") {
      nodesPage.selectNode(target.value || null);
      if (nodesPage.selectedNode) {
        nodesPage.applyNodeDetail(await api.nodeDetail(nodesPage.selectedNode));
      }
      draw();
    }
    if (action === "select-link-src" || action === "select-link-dst") {
      const src =
        action === "select-link-src"
          ? target.value
          : nodesPage.selectedLink?.[0] ?? null;
      const dst =
        action === "select-link-dst"
          ? target.value
          : nodesPage.selectedLink?.[1] ?? null;
      nodesPage.selectLink(src || null, dst || null);
      if (nodesPage.selectedLink) {
        try {
          nodesPage.applyLinkDetail(
            await api.linkDetail(nodesPage.selectedLink[0], nodesPage.selectedLink[1]),
          );
        } catch {
          nodesPage.linkDetail = null;
        }
      }
      draw();
    }
  });
}

export function start(): void {
  wireEvents();
  void poll();
  setInterval(() => void poll(), POLL_INTERVAL_MS);
}

if (typeof document !== "undefined" && document.getElementById("root")) {
  start();
}
