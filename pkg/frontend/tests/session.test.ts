import { describe, expect, it } from "vitest";

import { Session, type HistoryEntry, type KeyValueStore } from "../src/session.js";

class MapStore implements KeyValueStore {
  data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

function entry(kind: "bundle" | "edit", text: string): HistoryEntry {
  return {
    kind,
    at: "2026-01-01T00:00:00Z",
    text,
    fontId: "abc",
    seed: 0,
    tighten: false,
    encodedQuad: "10,10,90,10,90,90,10,90",
  };
}

describe("Session", () => {
  it("appends history and points selection at the newest entry", () => {
    const s = new Session("t", new MapStore());
    expect(s.addHistory(entry("bundle", "one"))).toBe(0);
    expect(s.addHistory(entry("edit", "two"))).toBe(1);
    expect(s.state.history.map((e) => e.text)).toEqual(["one", "two"]);
    expect(s.current()?.text).toBe("two");
  });

  it("never drops entries when an older one is re-selected", () => {
    const s = new Session("t", new MapStore());
    s.addHistory(entry("bundle", "one"));
    s.addHistory(entry("bundle", "two"));
    s.select(0);
    s.addHistory(entry("edit", "three"));
    expect(s.state.history).toHaveLength(3);
    expect(s.state.history[1].text).toBe("two");
    expect(s.current()?.text).toBe("three");
  });

  it("rejects out-of-range selection", () => {
    const s = new Session("t", new MapStore());
    expect(() => s.select(0)).toThrow(RangeError);
  });

  it("restores everything from the same store under the same id", () => {
    const store = new MapStore();
    const a = Session.restore("sess-9", store);
    a.state.text = "HELLO";
    a.state.seed = 7;
    a.state.draftPoints = [{ x: 1, y: 2 }];
    a.addHistory(entry("bundle", "HELLO"));
    a.save();

    const b = Session.restore("sess-9", store);
    expect(b.state.text).toBe("HELLO");
    expect(b.state.seed).toBe(7);
    expect(b.state.draftPoints).toEqual([{ x: 1, y: 2 }]);
    expect(b.state.history).toHaveLength(1);
    expect(b.current()?.encodedQuad).toBe("10,10,90,10,90,90,10,90");
  });

  it("starts fresh for an unknown id or a corrupt record", () => {
    const store = new MapStore();
    store.setItem("glyphkit-session:bad", "{not json");
    expect(Session.restore("missing", store).state.history).toEqual([]);
    expect(Session.restore("bad", store).state.history).toEqual([]);
  });

  it("keeps sessions with different ids apart", () => {
    const store = new MapStore();
    const a = Session.restore("a", store);
    a.state.text = "A";
    a.save();
    const b = Session.restore("b", store);
    expect(b.state.text).toBe("");
  });
});
