import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import type { DashboardSpec, FilterWire } from "../src/api.js";
import { DashboardController } from "../src/dashboard.js";
import { ReplayServer, loadRecording } from "./replay.js";

const recording = loadRecording();

const CLEARED = { selection: null };
const SELECTED_S1 = recording.session.find(
  (ex) => ex.path === "/dashboards/db001/selection" && ex.request !== null
    && (ex.request as { selection: unknown }).selection !== null,
)!.request as { selection: FilterWire };

// the saved dashboard exactly as the service returned it
const SPEC = recording.session.find(
  (ex) => ex.method === "POST" && ex.path === "/dashboards",
)!.response as DashboardSpec;

function controller(): { ctl: DashboardController; replay: ReplayServer } {
  const replay = new ReplayServer(recording.session);
  const client = new ApiClient("", replay.fetch);
  return { ctl: new DashboardController(client, SPEC), replay };
}

describe("DashboardController", () => {
  it("translates a bar click into the recorded equality filter", () => {
    const { ctl } = controller();
    ctl.selection = { vizId: "trips-by-origin-station-id", key: "s1" };
    expect(ctl.selectionWire()).toEqual(SELECTED_S1.selection);
  });

  it("has no filter without a selection", () => {
    const { ctl } = controller();
    expect(ctl.selectionWire()).toBeNull();
  });

  it("select fetches results and clicking the same bar toggles off", async () => {
    const { ctl, replay } = controller();
    await ctl.refresh();
    expect(ctl.results).toEqual(
      replay.recorded("POST", "/dashboards/db001/selection", CLEARED),
    );

    await ctl.select("trips-by-origin-station-id", "s1");
    expect(ctl.selection).toEqual({ vizId: "trips-by-origin-station-id", key: "s1" });
    expect(ctl.resultFor("total-trips")?.groups).toEqual([[null, 3]]);

    await ctl.select("trips-by-origin-station-id", "s1");
    expect(ctl.selection).toBeNull();
    expect(ctl.resultFor("total-trips")?.groups).toEqual([[null, 5]]);
  });

  it("refuses to select on a chart without a reference column", () => {
    const { ctl } = controller();
    ctl.selection = { vizId: "total-trips", key: "s1" };
    expect(() => ctl.selectionWire()).toThrow(/no reference column/);
  });

  it("resultFor is null until the first refresh", () => {
    const { ctl } = controller();
    expect(ctl.resultFor("total-trips")).toBeNull();
  });
});
