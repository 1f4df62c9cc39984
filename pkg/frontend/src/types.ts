/** Payload shapes of the survey JSON API. */

export type Lang = "en" | "sv";

export interface SessionInfo {
  judge_id: string;
  /** Presentation order for this judge; never reordered client-side. */
  order: string[];
  /** Triple ids this judge has already submitted. */
  judged: string[];
  total: number;
}

export interface EvalTriple {
  triple_id: string;
  source_sentence: string;
  question: string;
  answer: string;
  origin: "gold" | "generated";
  set: string;
}

export interface Criterion {
  code: string;
  direction: "up" | "down";
  statement: Record<Lang, string>;
}

export interface TriplePayload {
  triple: EvalTriple;
  guidelines: Record<Lang, string>;
  criteria: Criterion[];
}

export interface JudgementRecord {
  judge_id: string;
  triple_id: string;
  scores: Record<string, number>;
  timestamp: string;
}
