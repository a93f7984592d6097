/** Payload shapes served by the orchestrator gateway. */

export interface AppStatus {
  app_id: string;
  desired: Record<string, string>;
  current: Record<string, string>;
  match: boolean;
  last_update: [number, string] | null;
  uptime_s: number;
  degraded: boolean;
}

export interface ServiceRow {
  service_id: string;
  desired: string | null;
  current: string | null;
}

export interface AppDetail extends AppStatus {
  files: { compose: string | null; requirements: string | null };
  services: ServiceRow[];
}

export interface ReportNode {
  id: string;
  free_hw: number;
  software: string[];
  iot: string[];
  alive: boolean;
}

export interface ReportLink {
  src: string;
  dst: string;
  latency_ms: number;
  bandwidth_mbps: number;
  alive: boolean;
}

export interface Report {
  timestamp: number;
  nodes: ReportNode[];
  links: ReportLink[];
}

/** History points: [report sequence, ISO wall time, value...]. */
export type HistoryPoint = [number, string, number];
export type LinkHistoryPoint = [number, string, number, number];

export interface InfraPayload {
  report: Report | null;
  node_count_history: HistoryPoint[];
  hardware_unit: string;
}

export interface NodeDetailPayload {
  state: ReportNode;
  history: HistoryPoint[];
  services: { app_id: string; service_id: string }[];
}

export interface LinkDetailPayload {
  src: string;
  dst: string;
  latency_ms: number | null;
  bandwidth_mbps: number | null;
  alive: boolean;
  history: LinkHistoryPoint[];
}

export interface ServiceHistoryPayload {
  history: HistoryPoint[];
}

export interface QueuedResponse {
  queued_position: number;
}
