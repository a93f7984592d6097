/** View models for the two pages.
 *
 * The dashboard is a pure client: poll payloads flow in, panel render data
 * flows out. Two rules are enforced here rather than in the DOM layer:
 * editor buffers the operator touched are never overwritten by a poll until
 * saved or explicitly refreshed, and poll responses older than the newest
 * report sequence already displayed are dropped.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  AppDetail,
  AppStatus,
  HistoryPoint,
  InfraPayload,
  LinkDetailPayload,
  NodeDetailPayload,
} from "./types.js";

export interface EditorBuffer {
  server: string;
  draft: string;
  dirty: boolean;
}

function freshBuffer(): EditorBuffer {
  return { server: "", draft: "", dirty: false };
}

export type EditorName = "compose" | "requirements";

export class AppsPage {
  apps: AppStatus[] = [];
  selected: string | null = null;
  detail: AppDetail | null = null;
  serviceHistory: HistoryPoint[] = [];
  editors: Record<EditorName, EditorBuffer> = {
    compose: freshBuffer(),
    requirements: freshBuffer(),
  };
  saveError: string | null = null;
  connectionLost = false;
  private seq = 0;

  totalApps(): number {
    return this.apps.length;
  }

  totalServices(): number {
    return this.apps.reduce((n, app) => n + Object.keys(app.current).length, 0);
  }

  /** LED colour for one application row: green iff desired matches current. */
  led(status: AppStatus): "green" | "red" {
    return status.match ? "green" : "red";
  }

  applyApps(payload: { apps: AppStatus[] }): boolean {
    const seq = Math.max(0, ...payload.apps.map((a) => a.last_update?.[0] ?? 0));
    if (seq < this.seq) return false; // stale poll overlapped a newer one
    this.seq = Math.max(this.seq, seq);
    this.apps = payload.apps;
    this.connectionLost = false;
    if (this.selected && !payload.apps.some((a) => a.app_id === this.selected)) {
      this.select(null);
    }
    return true;
  }

  select(appId: string | null): void {
    if (appId === this.selected) return;
    this.selected = appId;
    this.detail = null;
    this.editors.compose = freshBuffer();
    this.editors.requirements = freshBuffer();
    this.saveError = null;
  }

  applyDetail(detail: AppDetail): boolean {
    if (detail.app_id !== this.selected) return false; // selection changed mid-flight
    this.detail = detail;
    this.syncEditor("compose", detail.files.compose ?? "");
    this.syncEditor("requirements", detail.files.requirements ?? "");
    return true;
  }

  private syncEditor(name: EditorName, serverText: string): void {
    const editor = this.editors[name];
    editor.server = serverText;
    if (!editor.dirty) {
      editor.draft = serverText; // only clean buffers follow the server
    }
  }

  edit(name: EditorName, text: string): void {
    const editor = this.editors[name];
    editor.draft = text;
    editor.dirty = text !== editor.server;
  }

  /** The refresh button: return to the unmodified (server) version. */
  refreshEditor(name: EditorName): void {
    const editor = this.editors[name];
    editor.draft = editor.server;
    editor.dirty = false;
  }

  /** The cancel button: delete all contents so the file can be rewritten. */
  cancelEditor(name: EditorName): void {
    const editor = this.editors[name];
    editor.draft = "";
    editor.dirty = editor.server !== "";
  }

  /** Save both dirty editors: one PUT with the changed files, then one exec.
   * Returns true when the gateway accepted the write. */
  async save(api: ApiClient): Promise<boolean> {
    if (!this.selected) return false;
    const files: { compose?: string; requirements?: string } = {};
    if (this.editors.compose.dirty) files.compose = this.editors.compose.draft;
    if (this.editors.requirements.dirty) files.requirements = this.editors.requirements.draft;
    if (Object.keys(files).length === 0) return false;
    try {
      await api.putFiles(this.selected, files);
      await api.execApp(this.selected); // sending a change also triggers reasoning
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        this.saveError = error.detail; // the parser's message, shown inline
        return false;
      }
      throw error;
    }
    this.saveError = null;
    for (const name of ["compose", "requirements"] as EditorName[]) {
      const editor = this.editors[name];
      if (editor.dirty) {
        editor.server = editor.draft;
        editor.dirty = false;
      }
    }
    return true;
  }
}

export class NodesPage {
  infra: InfraPayload | null = null;
  selectedNode: string | null = null;
  selectedLink: [string, string] | null = null;
  nodeDetail: NodeDetailPayload | null = null;
  linkDetail: LinkDetailPayload | null = null;
  connectionLost = false;
  private seq = 0;

  /** All known node ids, dead ones included. */
  nodeIds(): string[] {
    return (this.infra?.report?.nodes ?? []).map((n) => n.id);
  }

  aliveCount(): number {
    return (this.infra?.report?.nodes ?? []).filter((n) => n.alive).length;
  }

  applyInfra(payload: InfraPayload): boolean {
    const seq = payload.report?.timestamp ?? 0;
    if (seq < this.seq) return false; // stale response dropped
    this.seq = seq;
    this.infra = payload;
    this.connectionLost = false;
    return true;
  }

  selectNode(nodeId: string | null): void {
    this.selectedNode = nodeId;
    this.nodeDetail = null;
  }

  selectLink(src: string | null, dst: string | null): void {
    this.selectedLink = src && dst ? [src, dst] : null;
    this.linkDetail = null;
  }

  applyNodeDetail(payload: NodeDetailPayload): boolean {
    if (payload.state.id !== this.selectedNode) return false;
    this.nodeDetail = payload;
    return true;
  }

  applyLinkDetail(payload: LinkDetailPayload): boolean {
    if (!this.selectedLink) return false;
    if (payload.src !== this.selectedLink[0] || payload.dst !== this.selectedLink[1]) {
      return false;
    }
    this.linkDetail = payload;
    return true;
  }
}
