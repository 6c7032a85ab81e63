// Wire shapes of the dispatch service HTTP API. The console renders these
// verbatim; it never derives or recomputes planning data on its own.

export type Mode = "normal" | "failsafe";

export type Category = "FPS1" | "FPS2" | "FPS3" | "Critical" | "Single" | "NonOutage";

export const FPS_CATEGORIES: readonly Category[] = ["FPS1", "FPS2", "FPS3"];

export interface GeoPoint {
  lat: number;
  lon: number;
}

export interface TicketDoc {
  id: string;
  awc: string;
  location: GeoPoint;
  created_at: string;
  customers: number;
  category: Category;
  assessed_customers: number;
}

export interface CrewDoc {
  id: string;
  awc: string;
  anchor: GeoPoint;
  anchor_confirmed_at: string;
  availability: boolean;
  frozen: boolean;
  locked_to: string | null;
  assigned_count: number;
  shift_active: boolean;
}

export interface SnapshotDoc {
  awc: { code: string; yard: GeoPoint };
  taken_at: string;
  snapshot_id: string;
  tickets: TicketDoc[];
  crews: CrewDoc[];
}

export interface SnapshotStatus {
  snapshot: SnapshotDoc;
  mode: Mode;
}

export interface PlanSlotDoc {
  outage_id: string;
  frozen: boolean;
  rationale: string;
}

export interface PlanDoc {
  snapshot_id: string;
  created_at: string;
  runs_completed: number;
  partial: boolean;
  error: string | null;
  pipelines: Record<string, PlanSlotDoc[]>;
}

export interface DraftDoc extends PlanDoc {
  draft_id: string;
  solved_at: string;
  mode?: Mode;
}

export interface PublishedDoc extends PlanDoc {
  draft_id: string;
  published_at: string;
  stale_confirmed: boolean;
  notifications: { crew: string; next_outage: string }[];
}

export interface StalenessDoc {
  draft_id: string;
  age_seconds: number;
  remaining_seconds: number;
  stale: boolean;
  staleness_seconds: number;
  mode: Mode;
}

export interface ControlsDoc {
  frozen: string[];
  locks: Record<string, string>;
  unlocked: string[];
  withhold: boolean;
}

export interface ControlAck {
  ok: boolean;
  controls: ControlsDoc;
}

export type ControlRequest =
  | { op: "freeze"; crew: string }
  | { op: "unfreeze"; crew: string }
  | { op: "lock"; crew: string; outage: string }
  | { op: "unlock"; crew: string }
  | { op: "withhold"; enabled: boolean };

export type TriggerSource = "cadence" | "crew_available_event" | "manual";

export interface ErrorBody {
  error: { code: string; message: string };
}

// SSE stream frames; `kind` is open-ended but these are the ones emitted.
export type EventKind =
  | "draft_ready"
  | "published"
  | "staleness_warning"
  | "failsafe_entered";

export interface ConsoleEvent {
  id: number | null;
  kind: string;
  data: unknown;
}
