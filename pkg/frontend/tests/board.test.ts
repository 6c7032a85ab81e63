import { describe, expect, it } from "vitest";

import { buildBoard, crewChip, sortOutages, type OutageRow } from "../src/board.js";
import type {
  Category,
  ControlsDoc,
  CrewDoc,
  DraftDoc,
  PublishedDoc,
  SnapshotDoc,
  StalenessDoc,
  TicketDoc,
} from "../src/types.js";

function ticket(id: string, category: Category, customers: number): TicketDoc {
  return {
    id,
    awc: "NE-01",
    location: { lat: 43.2, lon: -72.4 },
    created_at: "2024-03-23T12:00:00Z",
    customers,
    category,
    assessed_customers: 0,
  };
}

function crewDoc(id: string, extra: Partial<CrewDoc> = {}): CrewDoc {
  return {
    id,
    awc: "NE-01",
    anchor: { lat: 43.2, lon: -72.4 },
    anchor_confirmed_at: "2024-03-23T12:00:00Z",
    availability: true,
    frozen: false,
    locked_to: null,
    assigned_count: 0,
    shift_active: true,
    ...extra,
  };
}

function snapshotDoc(tickets: TicketDoc[], crews: CrewDoc[]): SnapshotDoc {
  return {
    awc: { code: "NE-01", yard: { lat: 43.2, lon: -72.4 } },
    taken_at: "2024-03-23T12:00:00Z",
    snapshot_id: "snap-1",
    tickets,
    crews,
  };
}

function draftDoc(pipelines: DraftDoc["pipelines"]): DraftDoc {
  return {
    snapshot_id: "snap-1",
    created_at: "2024-03-23T12:00:00Z",
    runs_completed: 1,
    partial: false,
    error: null,
    pipelines,
    draft_id: "draft-1",
    solved_at: "2024-03-23T12:00:01Z",
  };
}

const noControls: ControlsDoc = { frozen: [], locks: {}, unlocked: [], withhold: false };

describe("outage ordering", () => {
  it("puts every safety ticket above every customer ticket", () => {
    const rows: OutageRow[] = [
      { id: "big", category: "Critical", fps: false, customers: 99999, assignedTo: null },
      { id: "w", category: "FPS3", fps: true, customers: 1, assignedTo: null },
      { id: "f1", category: "FPS1", fps: true, customers: 1, assignedTo: null },
      { id: "sm", category: "Single", fps: false, customers: 3, assignedTo: null },
    ];
    expect(sortOutages(rows).map((r) => r.id)).toEqual(["f1", "w", "big", "sm"]);
  });

  it("orders customer tickets by impact, ties by id", () => {
    const rows: OutageRow[] = [
      { id: "b", category: "Single", fps: false, customers: 10, assignedTo: null },
      { id: "a", category: "Single", fps: false, customers: 10, assignedTo: null },
      { id: "c", category: "Critical", fps: false, customers: 500, assignedTo: null },
    ];
    expect(sortOutages(rows).map((r) => r.id)).toEqual(["c", "a", "b"]);
  });
});

describe("crew chips", () => {
  it("maps snapshot and control state to chips", () => {
    expect(crewChip(crewDoc("c1"), noControls)).toBe("available");
    expect(crewChip(crewDoc("c2", { frozen: true }), noControls)).toBe("frozen");
    expect(crewChip(crewDoc("c3", { locked_to: "r1" }), noControls)).toBe("locked");
    expect(crewChip(crewDoc("c4", { assigned_count: 2 }), noControls)).toBe("en-route");
    expect(crewChip(crewDoc("c5", { availability: false }), noControls)).toBe("en-route");
  });

  it("applies operator controls on top of the snapshot", () => {
    const controls: ControlsDoc = { ...noControls, frozen: ["c1"], locks: { c2: "r9" } };
    expect(crewChip(crewDoc("c1"), controls)).toBe("frozen");
    expect(crewChip(crewDoc("c2"), controls)).toBe("locked");
  });

  it("frozen wins over locked", () => {
    expect(crewChip(crewDoc("c1", { frozen: true, locked_to: "r1" }), noControls)).toBe("frozen");
  });
});

describe("buildBoard", () => {
  const snap = snapshotDoc(
    [ticket("r1", "Single", 40), ticket("r2", "FPS1", 1)],
    [crewDoc("c1"), crewDoc("c2")],
  );

  it("marks frozen slot-1 entries and ranks slots", () => {
    const draft = draftDoc({
      c1: [
        { outage_id: "r2", frozen: true, rationale: "w=3000000" },
        { outage_id: "r1", frozen: false, rationale: "w=40" },
      ],
      c2: [],
    });
    const vm = buildBoard({ snapshot: snap, mode: "normal", draft });
    const c1 = vm.crews.find((c) => c.crew === "c1");
    expect(c1?.slots[0]).toMatchObject({ outageId: "r2", frozen: true, rank: 1 });
    expect(c1?.slots[1]).toMatchObject({ outageId: "r1", frozen: false, rank: 2 });
    expect(vm.planSource).toBe("draft");
  });

  it("maps assignments back onto the outage list", () => {
    const draft = draftDoc({ c1: [{ outage_id: "r1", frozen: false, rationale: "" }], c2: [] });
    const vm = buildBoard({ snapshot: snap, mode: "normal", draft });
    expect(vm.outages.find((o) => o.id === "r1")?.assignedTo).toBe("c1");
    expect(vm.outages.find((o) => o.id === "r2")?.assignedTo).toBeNull();
  });

  it("disables publish in fail-safe mode and shows the banner", () => {
    const draft = draftDoc({ c1: [], c2: [] });
    const vm = buildBoard({ snapshot: snap, mode: "failsafe", draft });
    expect(vm.publishDisabled).toBe(true);
    expect(vm.banner).toMatch(/FAIL-SAFE/);
  });

  it("disables publish when no draft exists or publishing is withheld", () => {
    expect(buildBoard({ snapshot: snap, mode: "normal" }).publishDisabled).toBe(true);
    const draft = draftDoc({ c1: [], c2: [] });
    const withheld: ControlsDoc = { ...noControls, withhold: true };
    expect(
      buildBoard({ snapshot: snap, mode: "normal", draft, controls: withheld }).publishDisabled,
    ).toBe(true);
    expect(buildBoard({ snapshot: snap, mode: "normal", draft }).publishDisabled).toBe(false);
  });

  it("keeps last known data under an unreachable banner", () => {
    const vm = buildBoard({ snapshot: snap, mode: "normal", unreachable: true });
    expect(vm.banner).toMatch(/unreachable/);
    expect(vm.publishDisabled).toBe(true);
    expect(vm.outages).toHaveLength(2); // still rendered from the last snapshot
  });

  it("prefers the draft over the published plan for display", () => {
    const draft = draftDoc({ c1: [{ outage_id: "r1", frozen: false, rationale: "" }], c2: [] });
    const published: PublishedDoc = {
      ...draftDoc({ c1: [{ outage_id: "r2", frozen: true, rationale: "" }], c2: [] }),
      published_at: "2024-03-23T12:05:00Z",
      stale_confirmed: false,
      notifications: [{ crew: "c1", next_outage: "r2" }],
    };
    const vm = buildBoard({ snapshot: snap, mode: "normal", draft, published });
    expect(vm.planSource).toBe("draft");
    expect(vm.crews.find((c) => c.crew === "c1")?.slots[0]?.outageId).toBe("r1");
    expect(vm.notifications).toEqual([{ crew: "c1", next_outage: "r2" }]);
  });

  it("carries the staleness countdown through untouched", () => {
    const st: StalenessDoc = {
      draft_id: "draft-1",
      age_seconds: 10,
      remaining_seconds: 110,
      stale: false,
      staleness_seconds: 120,
      mode: "normal",
    };
    const vm = buildBoard({ snapshot: snap, mode: "normal", staleness: st });
    expect(vm.countdown).toEqual({ draftId: "draft-1", remainingSeconds: 110, stale: false });
  });
});
