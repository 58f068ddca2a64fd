import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import type { DashboardSpec, VizSpec } from "../src/api.js";
import { DashboardBuilder, slugify } from "../src/builder.js";
import { ReplayServer, loadRecording } from "./replay.js";

const recording = loadRecording();

async function loadedBuilder(): Promise<{ builder: DashboardBuilder; replay: ReplayServer }> {
  const replay = new ReplayServer(recording.session);
  const builder = await DashboardBuilder.load(new ApiClient("", replay.fetch));
  return { builder, replay };
}

describe("slugify", () => {
  it("turns titles into ids", () => {
    expect(slugify("total trips")).toBe("total-trips");
    expect(slugify("Trips by origin_station_id")).toBe("trips-by-origin-station-id");
    expect(slugify("  spaced  out  ")).toBe("spaced-out");
  });
});

describe("DashboardBuilder", () => {
  it("pre-fills drafts from the service preview", async () => {
    const { builder, replay } = await loadedBuilder();
    const preview = replay.recorded("GET", "/dashboards/preview") as DashboardSpec;

    expect(builder.drafts.map((d) => d.viz.id)).toEqual([
      "trips-by-destination-station-id",
      "trips-by-origin-station-id",
    ]);

    const departure = builder.draft("trips-by-origin-station-id").viz;
    const recorded = preview.visualizations.find((v) => v.id === departure.id)!;
    expect(departure).toEqual(recorded);
    expect(departure.chart_type).toBe("bar");
    expect(departure.measure_binding.column).toBe("id");
    expect(departure.measure_binding.function).toBe("count");
    expect(departure.dimension_binding?.column).toBe("label");
    expect(departure.join_path?.reference_column).toBe("origin_station_id");
  });

  it("adds a number card that copies the first chart's measure", async () => {
    const { builder } = await loadedBuilder();
    const draft = builder.addNumberCard("total trips");

    expect(draft.viz.id).toBe("total-trips");
    expect(draft.viz.chart_type).toBe("number");
    expect(draft.viz.measure_binding).toEqual(builder.drafts[0]!.viz.measure_binding);
    expect(draft.viz.dimension_binding).toBeNull();
    expect(draft.viz.join_path).toBeNull();
    expect(draft.userAdded).toBe(true);
  });

  it("sends only the added card on generate", async () => {
    const { builder, replay } = await loadedBuilder();
    builder.addNumberCard("total trips");
    expect(builder.edits().map((v: VizSpec) => v.id)).toEqual(["total-trips"]);

    const spec = await builder.generate(new ApiClient("", replay.fetch));
    expect(spec.id).toBe("db001");
    expect(spec.visualizations.map((v) => v.id).sort()).toEqual([
      "total-trips",
      "trips-by-destination-station-id",
      "trips-by-origin-station-id",
    ]);
  });

  it("includes edited generated charts in the request", async () => {
    const { builder } = await loadedBuilder();
    builder.updateDraft("trips-by-origin-station-id", { function: "count", title: "departures" });
    const edits = builder.edits();
    expect(edits).toHaveLength(1);
    expect(edits[0]!.title).toBe("departures");
    // preview itself stays untouched
    expect(builder.preview.visualizations[1]!.title).toBe("trips by origin_station_id");
  });

  it("refuses a card when no chart exists to copy the measure from", async () => {
    const { builder } = await loadedBuilder();
    builder.drafts.length = 0;
    expect(() => builder.addNumberCard("orphan")).toThrow(/no visualization/);
  });

  it("flags a column missing from the manifest and refuses to generate", async () => {
    const { builder, replay } = await loadedBuilder();
    const served = replay.served.length;

    builder.updateDraft("trips-by-origin-station-id", { column: "ghost" });
    expect(builder.draft("trips-by-origin-station-id").error).toMatch(/no column "ghost"/);

    // invalid draft blocks the whole request, nothing goes over the wire
    const client = new ApiClient("", replay.fetch);
    await expect(builder.generate(client)).rejects.toThrow(/no column "ghost"/);
    expect(replay.served.length).toBe(served);

    // correcting the column clears the error
    builder.updateDraft("trips-by-origin-station-id", { column: "id" });
    expect(builder.draft("trips-by-origin-station-id").error).toBeNull();
  });
});
