/** Client-side checks mirroring the API's judgement validation. */

export const CRITERION_CODES = [
  "C1",
  "C2",
  "C3",
  "C4",
  "C5",
  "C6",
  "C7",
  "C8",
  "C9",
] as const;

export type CriterionCode = (typeof CRITERION_CODES)[number];

/** Statements about the suggested answer; the one-click shortcut targets these. */
export const ANSWER_CRITERIA: readonly CriterionCode[] = ["C6", "C7", "C8", "C9"];

/** Scores still being filled in; complete drafts satisfy the Scores shape. */
export type Draft = Partial<Record<CriterionCode, number>>;
export type Scores = Record<CriterionCode, number>;

export function isValidScore(value: unknown): value is number {
  return (
    typeof value === "number" && Number.isInteger(value) && value >= 1 && value <= 4
  );
}

/** Criteria unanswered or out of range, in catalogue order. */
export function missingCriteria(draft: Draft): CriterionCode[] {
  return CRITERION_CODES.filter((code) => !isValidScore(draft[code]));
}

export function isComplete(draft: Draft): draft is Scores {
  return missingCriteria(draft).length === 0;
}

/**
 * The incomprehensible-question rule: every statement about the suggested
 * answer gets a 1. Question statements are left untouched.
 */
export function applyIncomprehensibleShortcut(draft: Draft): Draft {
  const next: Draft = { ...draft };
  for (const code of ANSWER_CRITERIA) {
    next[code] = 1;
  }
  return next;
}
