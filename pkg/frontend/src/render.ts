/** Panel renderers: pure functions from view-model state to HTML strings.
 * Interaction wiring happens in main.ts via data-action attributes. */

import { lineChart } from "./charts.js";
import type { AppsPage, NodesPage } from "./state.js";
import type { AppStatus } from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function panel(title: string, body: string, cls = ""): string {
  return `<section class="panel ${cls}"><h3>${title}</h3>${body}</section>`;
}

export function renderLed(status: AppStatus): string {
  const colour = status.match ? "green" : "red";
  const title = status.match ? "desired and current placements match" : "placements differ";
  return `<span class="led ${colour}" title="${title}"></span>`;
}

// -- Applications page ---------------------------------------------------------

export function renderStatistics(page: AppsPage): string {
  const counts = page.serviceHistory.map((p) => p[2]);
  return panel(
    "Statistics",
    `<div class="stats-row">
       <div class="stat"><span class="stat-value">${page.totalApps()}</span> applications</div>
       <div class="stat"><span class="stat-value">${page.totalServices()}</span> services deployed</div>
     </div>
     ${lineChart(counts, { label: "deployed services over time" })}`,
    "statistics",
  );
}

export function renderOverview(page: AppsPage): string {
  if (page.apps.length === 0) {
    return panel("Overview", `<p class="empty">no applications managed</p>`, "overview");
  }
  const rows = page.apps
    .map((app) => {
      const services = Object.entries(app.current)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([sid, node]) => `<li>${esc(sid)} &rarr; ${esc(node)}</li>`)
        .join("");
      const last = app.last_update ? esc(app.last_update[1]) : "never";
      const selected = app.app_id === page.selected ? " selected" : "";
      return `<tr class="app-row${selected}" data-action="select-app" data-app="${esc(app.app_id)}">
          <td>${renderLed(app)} ${esc(app.app_id)}</td>
          <td><ul class="placement">${services || "<li>(none)</li>"}</ul></td>
          <td class="muted">${last}</td>
        </tr>`;
    })
    .join("");
  return panel(
    "Overview",
    `<table class="apps"><thead><tr><th>application</th><th>current placement</th><th>last update</th></tr></thead>
     <tbody>${rows}</tbody></table>`,
    "overview",
  );
}

function renderEditor(page: AppsPage, name: "compose" | "requirements", title: string): string {
  const editor = page.editors[name];
  const dirty = editor.dirty ? ` <span class="dirty-flag">modified</span>` : "";
  return panel(
    `${title}${dirty}`,
    `<textarea data-editor="${name}" spellcheck="false" rows="12">${esc(editor.draft)}</textarea>
     <div class="editor-buttons">
       <button data-action="save" ${page.selected ? "" : "disabled"}>Save</button>
       <button data-action="refresh-editor" data-editor-name="${name}">Refresh</button>
       <button data-action="cancel-editor" data-editor-name="${name}">Cancel</button>
     </div>`,
    `editor editor-${name}`,
  );
}

export function renderComposeEditor(page: AppsPage): string {
  return renderEditor(page, "compose", "docker-compose.yml");
}

export function renderRequirementsEditor(page: AppsPage): string {
  return renderEditor(page, "requirements", "requirements.yml");
}

export function renderAppDetail(page: AppsPage): string {
  const detail = page.detail;
  if (!page.selected || !detail) {
    return panel("Application's Detail", `<p class="empty">select an application</p>`, "app-detail");
  }
  const rows = detail.services
    .map(
      (s) => `<tr>
        <td>${esc(s.service_id)}</td>
        <td>${esc(s.desired ?? "-")}</td>
        <td>${esc(s.current ?? "-")}</td>
      </tr>`,
    )
    .join("");
  const uptime = formatUptime(detail.uptime_s);
  const last = detail.last_update ? esc(detail.last_update[1]) : "never";
  const error = page.saveError
    ? `<p class="save-error">rejected: ${esc(page.saveError)}</p>`
    : "";
  const degraded = detail.degraded ? `<span class="degraded">degraded</span>` : "";
  return panel(
    "Application's Detail",
    `<div class="detail-head">
       ${renderLed(detail)}
       <strong>${esc(detail.app_id)}</strong> ${degraded}
       <span class="muted">uptime ${uptime}, last update ${last}</span>
     </div>
     ${error}
     <table class="services"><thead><tr><th>service</th><th>desired</th><th>actual</th></tr></thead>
      <tbody>${rows}</tbody></table>
     <div class="detail-buttons">
       <button data-action="exec-app">Exec</button>
       <button data-action="remove-app" class="danger">Remove</button>
     </div>`,
    "app-detail",
  );
}

function formatUptime(seconds: number): string {
  if (seconds < 120) return `${Math.round(seconds)}s`;
  if (seconds < 7200) return `${Math.round(seconds / 60)}m`;
  return `${(seconds / 3600).toFixed(1)}h`;
}

// -- Nodes page -----------------------------------------------------------------

export function renderNodesOverview(page: NodesPage): string {
  const counts = (page.infra?.node_count_history ?? []).map((p) => p[2]);
  const last = page.infra?.report ? `report #${page.infra.report.timestamp}` : "no report yet";
  const nodeOptions = page
    .nodeIds()
    .map((id) => {
      const alive = page.infra!.report!.nodes.find((n) => n.id === id)!.alive;
      const selected = id === page.selectedNode ? " selected" : "";
      return `<option value="${esc(id)}"${selected}>${esc(id)}${alive ? "" : " (offline)"}</option>`;
    })
    .join("");
  const linkOptions = (which: 0 | 1) =>
    page
      .nodeIds()
      .map((id) => {
        const selected = page.selectedLink && page.selectedLink[which] === id ? " selected" : "";
        return `<option value="${esc(id)}"${selected}>${esc(id)}</option>`;
      })
      .join("");
  return panel(
    "Overview",
    `<div class="stats-row">
       <div class="stat"><span class="stat-value">${page.aliveCount()}</span> nodes available</div>
       <div class="muted">${last}</div>
     </div>
     ${lineChart(counts, { label: "available nodes over time", stroke: "#2a9d8f" })}
     <div class="selector-row">
       <label>node <select data-action="select-node"><option value=""></option>${nodeOptions}</select></label>
       <label>link <select data-action="select-link-src"><option value=""></option>${linkOptions(0)}</select>
       &rarr; <select data-action="select-link-dst"><option value=""></option>${linkOptions(1)}</select></label>
     </div>`,
    "nodes-overview",
  );
}

export function renderNodeDetail(page: NodesPage): string {
  if (!page.selectedNode) {
    return panel("Node's Detail", `<p class="empty">select a node</p>`, "node-detail");
  }
  const detail = page.nodeDetail;
  if (!detail) {
    return panel("Node's Detail", `<p class="empty">loading ${esc(page.selectedNode)}...</p>`, "node-detail");
  }
  const ram = detail.history.map((p) => p[2]);
  const online = detail.state.alive
    ? `<span class="led green"></span> online`
    : `<span class="led red"></span> offline (last known status below)`;
  return panel(
    "Node's Detail",
    `<div class="detail-head"><strong>${esc(detail.state.id)}</strong> ${online}</div>
     <p>free RAM: ${detail.state.free_hw} MB</p>
     ${lineChart(ram, { label: "free RAM (MB)" })}
     <p>software: ${detail.state.software.map(esc).join(", ") || "(none)"}</p>
     <p>IoT devices: ${detail.state.iot.map(esc).join(", ") || "(none)"}</p>`,
    "node-detail",
  );
}

export function renderLinkDetail(page: NodesPage): string {
  if (!page.selectedLink) {
    return panel("Link's Detail", `<p class="empty">select both link endpoints</p>`, "link-detail");
  }
  const detail = page.linkDetail;
  if (!detail) {
    const [a, b] = page.selectedLink;
    return panel("Link's Detail", `<p class="empty">link ${esc(a)} &rarr; ${esc(b)} unavailable</p>`, "link-detail");
  }
  const alive = detail.alive
    ? `<span class="led green"></span> available`
    : `<span class="led red"></span> unavailable`;
  return panel(
    "Link's Detail",
    `<div class="detail-head"><strong>${esc(detail.src)} &rarr; ${esc(detail.dst)}</strong> ${alive}</div>
     <p>latency: ${detail.latency_ms?.toFixed(1) ?? "?"} ms</p>
     <p>bandwidth: ${detail.bandwidth_mbps?.toFixed(1) ?? "?"} Mbps</p>`,
    "link-detail",
  );
}

export function renderLinkHistory(page: NodesPage): string {
  const detail = page.linkDetail;
  if (!detail) {
    return panel("Link's History", `<p class="empty">select a link</p>`, "link-history");
  }
  const latency = detail.history.map((p) => p[2]);
  const bandwidth = detail.history.map((p) => p[3]);
  return panel(
    "Link's History",
    lineChart(latency, { label: "latency (ms)", stroke: "#e76f51" }) +
      lineChart(bandwidth, { label: "bandwidth (Mbps)", stroke: "#2a9d8f" }),
    "link-history",
  );
}

export function renderNodeApplications(page: NodesPage, apps: AppStatus[]): string {
  const lastUpdates = apps
    .map((a) => `<li>${esc(a.app_id)}: ${a.last_update ? esc(a.last_update[1]) : "never"}</li>`)
    .join("");
  let deployed = `<p class="empty">select a node to see its services</p>`;
  if (page.selectedNode && page.nodeDetail) {
    const services = page.nodeDetail.services
      .map((s) => `<li>${esc(s.app_id)} / ${esc(s.service_id)}</li>`)
      .join("");
    deployed = `<p>deployed on ${esc(page.selectedNode)}:</p><ul>${services || "<li>(none)</li>"}</ul>`;
  }
  return panel(
    "Applications",
    `<ul class="muted">${lastUpdates || "<li>no applications</li>"}</ul>${deployed}`,
    "node-apps",
  );
}

export function renderConnectionBanner(lost: boolean): string {
  return lost
    ? `<div class="banner">gateway unreachable; showing stale data</div>`
    : "";
}
