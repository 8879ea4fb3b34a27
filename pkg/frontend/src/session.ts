/**
 * Per-session workbench state with append-only history.
 *
 * State round-trips through an injectable key-value store (localStorage
 * in the browser, a Map shim under test) keyed by session id, so a page
 * reload with the same id restores the full history. History entries are
 * never mutated or removed; undo is re-selecting an older entry.
 */

import type { BundleReply, EditReply } from "./client.js";
import type { Point } from "./quad.js";

export type KeyValueStore = Pick<Storage, "getItem" | "setItem">;

export interface HistoryEntry {
  kind: "bundle" | "edit";
  at: string;
  text: string;
  fontId: string;
  seed: number;
  tighten: boolean;
  encodedQuad: string;
  bundle?: BundleReply;
  edit?: EditReply;
}

export interface SessionState {
  id: string;
  imagePng: string;
  imageName: string;
  draftPoints: Point[];
  text: string;
  caption: string;
  fontId: string;
  seed: number;
  tighten: boolean;
  backend: "stub" | "http";
  endpoint: string;
  history: HistoryEntry[];
  selected: number;
}

function blank(id: string): SessionState {
  return {
    id,
    imagePng: "",
    imageName: "",
    draftPoints: [],
    text: "",
    caption: "",
    fontId: "",
    seed: 0,
    tighten: false,
    backend: "stub",
    endpoint: "",
    history: [],
    selected: -1,
  };
}

class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.has(key) ? this.data.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

function defaultStore(): KeyValueStore {
  if (typeof localStorage !== "undefined") return localStorage;
  return new MemoryStore();
}

export class Session {
  readonly state: SessionState;
  private store: KeyValueStore;

  constructor(id: string, store?: KeyValueStore) {
    this.store = store ?? defaultStore();
    this.state = blank(id);
  }

  /** Load a saved session; a missing or corrupt record yields a fresh one. */
  static restore(id: string, store?: KeyValueStore): Session {
    const session = new Session(id, store);
    const raw = session.store.getItem(`glyphkit-session:${id}`);
    if (raw !== null) {
      try {
        const saved = JSON.parse(raw) as SessionState;
        if (saved && saved.id === id && Array.isArray(saved.history)) {
          Object.assign(session.state, saved);
        }
      } catch {
        // unreadable record: start clean rather than fail the mount
      }
    }
    return session;
  }

  save(): void {
    this.store.setItem(`glyphkit-session:${this.state.id}`, JSON.stringify(this.state));
  }

  /** Append a result; history is never rewritten in place. */
  addHistory(entry: HistoryEntry): number {
    this.state.history = [...this.state.history, entry];
    this.state.selected = this.state.history.length - 1;
    this.save();
    return this.state.selected;
  }

  /** Undo/redo is just pointing at an older entry. */
  select(index: number): HistoryEntry {
    if (index < 0 || index >= this.state.history.length) {
      throw new RangeError(`history index ${index} out of range`);
    }
    this.state.selected = index;
    this.save();
    return this.state.history[index];
  }

  current(): HistoryEntry | null {
    const i = this.state.selected;
    return i >= 0 && i < this.state.history.length ? this.state.history[i] : null;
  }
}
