// Board view model: a pure projection of service responses into what the
// operator sees. No planning logic lives here; ordering and badges follow
// the service's own priority semantics, and every number shown comes from
// an API document.

import type {
  Category,
  ControlsDoc,
  CrewDoc,
  DraftDoc,
  Mode,
  PlanDoc,
  PublishedDoc,
  SnapshotDoc,
  StalenessDoc,
} from "./types.js";

export type CrewChip = "available" | "frozen" | "locked" | "en-route";

export interface OutageRow {
  id: string;
  category: Category;
  fps: boolean;
  customers: number;
  assignedTo: string | null;
}

export interface SlotView {
  outageId: string;
  frozen: boolean;
  rationale: string;
  rank: number;
}

export interface PipelineCard {
  crew: string;
  chip: CrewChip;
  lockedTo: string | null;
  slots: SlotView[];
}

export interface CountdownView {
  draftId: string;
  remainingSeconds: number;
  stale: boolean;
}

export interface BoardViewModel {
  mode: Mode;
  banner: string | null;
  publishDisabled: boolean;
  planSource: "draft" | "published" | null;
  outages: OutageRow[];
  crews: PipelineCard[];
  countdown: CountdownView | null;
  notifications: { crew: string; next_outage: string }[];
}

export interface BoardInput {
  snapshot?: SnapshotDoc;
  mode: Mode;
  draft?: DraftDoc | null;
  published?: PublishedDoc | null;
  staleness?: StalenessDoc | null;
  controls?: ControlsDoc | null;
  unreachable?: boolean;
}

const FPS_ORDER: Record<string, number> = { FPS1: 0, FPS2: 1, FPS3: 2 };

function categoryTier(category: Category): number {
  return FPS_ORDER[category] ?? 3;
}

// Safety tickets first (strongest tier on top), everything else by
// customer impact; the same order the optimizer's weights induce.
export function sortOutages(rows: OutageRow[]): OutageRow[] {
  return [...rows].sort((a, b) => {
    const tier = categoryTier(a.category) - categoryTier(b.category);
    if (tier !== 0) return tier;
    if (a.customers !== b.customers) return b.customers - a.customers;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
}

export function crewChip(crew: CrewDoc, controls?: ControlsDoc | null): CrewChip {
  const frozen = crew.frozen || (controls?.frozen.includes(crew.id) ?? false);
  if (frozen) return "frozen";
  const locked = crew.locked_to !== null || controls?.locks[crew.id] !== undefined;
  if (locked) return "locked";
  if (crew.assigned_count > 0 || !crew.availability || !crew.shift_active) return "en-route";
  return "available";
}

function assignmentIndex(plan: PlanDoc | null | undefined): Map<string, string> {
  const index = new Map<string, string>();
  if (!plan) return index;
  for (const [crew, slots] of Object.entries(plan.pipelines)) {
    for (const slot of slots) index.set(slot.outage_id, crew);
  }
  return index;
}

export function buildBoard(input: BoardInput): BoardViewModel {
  const plan: PlanDoc | null = input.draft ?? input.published ?? null;
  const planSource = input.draft ? "draft" : input.published ? "published" : null;
  const assigned = assignmentIndex(plan);

  const outages: OutageRow[] = sortOutages(
    (input.snapshot?.tickets ?? []).map((t) => ({
      id: t.id,
      category: t.category,
      fps: categoryTier(t.category) < 3,
      customers: t.customers,
      assignedTo: assigned.get(t.id) ?? null,
    })),
  );

  const crews: PipelineCard[] = (input.snapshot?.crews ?? []).map((c) => ({
    crew: c.id,
    chip: crewChip(c, input.controls),
    lockedTo: input.controls?.locks[c.id] ?? c.locked_to,
    slots: (plan?.pipelines[c.id] ?? []).map((slot, i) => ({
      outageId: slot.outage_id,
      frozen: slot.frozen,
      rationale: slot.rationale,
      rank: i + 1,
    })),
  }));
  crews.sort((a, b) => (a.crew < b.crew ? -1 : a.crew > b.crew ? 1 : 0));

  let banner: string | null = null;
  if (input.unreachable) {
    banner = "service unreachable; showing last known state";
  } else if (input.mode === "failsafe") {
    banner = "FAIL-SAFE: snapshot feed rejected; last published plan frozen until a valid snapshot arrives";
  }

  const publishDisabled =
    input.unreachable === true ||
    input.mode === "failsafe" ||
    input.draft == null ||
    (input.controls?.withhold ?? false);

  const countdown: CountdownView | null = input.staleness
    ? {
        draftId: input.staleness.draft_id,
        remainingSeconds: input.staleness.remaining_seconds,
        stale: input.staleness.stale,
      }
    : null;

  return {
    mode: input.mode,
    banner,
    publishDisabled,
    planSource,
    outages,
    crews,
    countdown,
    notifications: input.published?.notifications ?? [],
  };
}
