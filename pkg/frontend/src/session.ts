/** Presentation order, progress and draft scores for one judge's session. */

import type { SessionInfo } from "./types.js";
import {
  type CriterionCode,
  type Draft,
  CRITERION_CODES,
  isValidScore,
} from "./validation.js";

/** Minimal localStorage-compatible surface, injectable for tests. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}

export class Session {
  readonly judgeId: string;
  readonly order: readonly string[];
  readonly total: number;
  private judgedSet: Set<string>;
  // 0..order.length; order.length means the session is finished
  private cursor: number;
  private store: KeyValueStore;

  constructor(info: SessionInfo, store: KeyValueStore) {
    this.judgeId = info.judge_id;
    this.order = [...info.order];
    this.total = info.total;
    this.judgedSet = new Set(info.judged);
    this.store = store;
    this.cursor = this.nextUnanswered(0);
  }

  private nextUnanswered(from: number): number {
    let i = from;
    while (i < this.order.length && this.judgedSet.has(this.order[i] as string)) {
      i += 1;
    }
    return i;
  }

  get done(): boolean {
    return this.cursor >= this.order.length;
  }

  /** Triple id under the cursor, or null once the session is finished. */
  get current(): string | null {
    return this.done ? null : (this.order[this.cursor] as string);
  }

  get position(): number {
    return this.cursor;
  }

  get judgedCount(): number {
    return this.judgedSet.size;
  }

  isJudged(tripleId: string): boolean {
    return this.judgedSet.has(tripleId);
  }

  /** Record a successful submission and move to the next open triple. */
  markJudged(tripleId: string): void {
    this.judgedSet.add(tripleId);
    this.clearDraft(tripleId);
    this.cursor = this.nextUnanswered(this.cursor);
  }

  /** Review mode only: step back one triple, judged or not. */
  goBack(): void {
    if (this.cursor > 0) {
      this.cursor -= 1;
    }
  }

  private draftKey(tripleId: string): string {
    return `treeqg-survey:${this.judgeId}:${tripleId}`;
  }

  /** Cached partial scores for a triple; junk in the store is dropped. */
  getDraft(tripleId: string): Draft {
    const raw = this.store.getItem(this.draftKey(tripleId));
    if (raw === null) {
      return {};
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(raw);
    } catch {
      return {};
    }
    if (typeof parsed !== "object" || parsed === null) {
      return {};
    }
    const draft: Draft = {};
    for (const code of CRITERION_CODES) {
      const value = (parsed as Record<string, unknown>)[code];
      if (isValidScore(value)) {
        draft[code] = value;
      }
    }
    return draft;
  }

  setDraftScore(tripleId: string, code: CriterionCode, value: number): Draft {
    const draft = this.getDraft(tripleId);
    draft[code] = value;
    this.store.setItem(this.draftKey(tripleId), JSON.stringify(draft));
    return draft;
  }

  clearDraft(tripleId: string): void {
    this.store.removeItem(this.draftKey(tripleId));
  }
}
