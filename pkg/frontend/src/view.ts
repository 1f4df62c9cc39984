/** DOM rendering for the survey screens; holds no state of its own. */

import type { Criterion, EvalTriple, Lang } from "./types.js";
import {
  type CriterionCode,
  type Draft,
  ANSWER_CRITERIA,
} from "./validation.js";

export interface UiText {
  title: string;
  judgePrompt: string;
  judgeLabel: string;
  begin: string;
  start: string;
  progress: (judged: number, total: number) => string;
  sentence: string;
  question: string;
  answer: string;
  scaleLow: string;
  scaleHigh: string;
  shortcut: string;
  shortcutHint: string;
  submit: string;
  back: string;
  missing: string;
  guidelines: string;
  done: string;
  offline: string;
  retry: string;
  otherLang: string;
}

export const UI_TEXT: Record<Lang, UiText> = {
  en: {
    title: "Question survey",
    judgePrompt: "Enter your judge id to begin.",
    judgeLabel: "Judge id",
    begin: "Begin",
    start: "Start",
    progress: (judged, total) => `${judged} of ${total} answered`,
    sentence: "Sentence",
    question: "Question",
    answer: "Suggested answer",
    scaleLow: "Disagree",
    scaleHigh: "Agree",
    shortcut: "The question is impossible to understand",
    shortcutHint: "Sets 1 for every statement about the suggested answer.",
    submit: "Submit",
    back: "Back",
    missing: "Please answer the highlighted statements.",
    guidelines: "Guidelines",
    done: "All done. Thank you for taking part!",
    offline: "The server could not be reached. Your choices are kept on this device.",
    retry: "Try again",
    otherLang: "Svenska",
  },
  sv: {
    title: "Frågeenkät",
    judgePrompt: "Ange ditt bedömar-id för att börja.",
    judgeLabel: "Bedömar-id",
    begin: "Börja",
    start: "Starta",
    progress: (judged, total) => `${judged} av ${total} besvarade`,
    sentence: "Mening",
    question: "Fråga",
    answer: "Föreslaget svar",
    scaleLow: "Håller inte med",
    scaleHigh: "Håller helt med",
    shortcut: "Frågan går inte att förstå",
    shortcutHint: "Väljer 1 för alla påståenden om det föreslagna svaret.",
    submit: "Skicka",
    back: "Tillbaka",
    missing: "Besvara de markerade påståendena.",
    guidelines: "Instruktioner",
    done: "Klart. Tack för din medverkan!",
    offline: "Servern kunde inte nås. Dina val finns kvar på den här enheten.",
    retry: "Försök igen",
    otherLang: "English",
  },
};

const SCALE = [1, 2, 3, 4] as const;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

function clear(host: HTMLElement): void {
  host.replaceChildren();
}

/** Link that reopens the current session in the other language. */
function langToggle(lang: Lang, texts: UiText): HTMLElement {
  const params = new URLSearchParams(window.location.search);
  params.set("lang", lang === "sv" ? "en" : "sv");
  return el(
    "a",
    { class: "lang-toggle", href: `?${params.toString()}` },
    texts.otherLang,
  );
}

function header(
  texts: UiText,
  lang: Lang,
  progress: string | null,
  guidelineText: string | null,
): HTMLElement {
  const bar = el("header", { class: "bar" });
  if (progress !== null) {
    bar.append(el("span", { class: "progress" }, progress));
  }
  bar.append(langToggle(lang, texts));
  const head = el("div", {}, bar);
  if (guidelineText !== null) {
    head.append(
      el(
        "details",
        { class: "guidelines" },
        el("summary", {}, texts.guidelines),
        el("p", {}, guidelineText),
      ),
    );
  }
  return head;
}

export function renderJudgePrompt(
  host: HTMLElement,
  texts: UiText,
  lang: Lang,
  onSubmit: (judgeId: string) => void,
): void {
  clear(host);
  const input = el("input", {
    id: "judge-id",
    type: "text",
    autocomplete: "off",
  });
  const form = el(
    "form",
    { class: "card prompt" },
    el("p", {}, texts.judgePrompt),
    el("label", { for: "judge-id" }, texts.judgeLabel),
    input,
    el("button", { type: "submit" }, texts.begin),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const judgeId = input.value.trim();
    if (judgeId !== "") {
      onSubmit(judgeId);
    }
  });
  host.append(header(texts, lang, null, null), form);
}

/** Full-page guideline text shown before the first triple of a session. */
export function renderGuidelines(
  host: HTMLElement,
  texts: UiText,
  lang: Lang,
  guidelineText: string,
  onStart: () => void,
): void {
  clear(host);
  const button = el("button", { type: "button", class: "primary" }, texts.start);
  button.addEventListener("click", onStart);
  host.append(
    header(texts, lang, null, null),
    el(
      "main",
      { class: "card" },
      el("h1", {}, texts.guidelines),
      el("p", {}, guidelineText),
      button,
    ),
  );
}

export function renderDone(host: HTMLElement, texts: UiText, lang: Lang): void {
  clear(host);
  host.append(
    header(texts, lang, null, null),
    el("main", { class: "card" }, el("p", { class: "done" }, texts.done)),
  );
}

export interface TripleView {
  texts: UiText;
  lang: Lang;
  triple: EvalTriple;
  criteria: Criterion[];
  guidelineText: string;
  draft: Draft;
  judged: number;
  total: number;
  review: boolean;
  canGoBack: boolean;
  onScore: (code: CriterionCode, value: number) => void;
  onShortcut: () => void;
  onSubmit: () => void;
  onBack: () => void;
}

export interface TripleScreen {
  /** Flag unanswered rows after a blocked submission. */
  highlightMissing(codes: CriterionCode[]): void;
}

function criterionRow(
  view: TripleView,
  criterion: Criterion,
  rows: Map<string, HTMLFieldSetElement>,
): HTMLFieldSetElement {
  const code = criterion.code as CriterionCode;
  const scale = el("div", { class: "scale" });
  scale.append(el("span", { class: "end" }, `1 ${view.texts.scaleLow}`));
  for (const value of SCALE) {
    const radio = el("input", {
      type: "radio",
      name: code,
      value: String(value),
    });
    if (view.draft[code] === value) {
      radio.checked = true;
    }
    radio.addEventListener("change", () => {
      const row = rows.get(code);
      row?.classList.remove("missing");
      view.onScore(code, value);
    });
    scale.append(el("label", { class: "choice" }, radio, String(value)));
  }
  scale.append(el("span", { class: "end" }, `4 ${view.texts.scaleHigh}`));
  const row = el(
    "fieldset",
    { class: "criterion", "data-code": code },
    el("legend", {}, criterion.statement[view.lang]),
    scale,
  );
  rows.set(code, row);
  return row;
}

export function renderTriple(host: HTMLElement, view: TripleView): TripleScreen {
  clear(host);
  const texts = view.texts;
  const rows = new Map<string, HTMLFieldSetElement>();

  const item = el(
    "section",
    { class: "item" },
    el("p", { class: "label" }, texts.sentence),
    el("p", { class: "text sentence" }, view.triple.source_sentence),
    el("p", { class: "label" }, texts.question),
    el("p", { class: "text question" }, view.triple.question),
    el("p", { class: "label" }, texts.answer),
    el("p", { class: "text answer" }, view.triple.answer),
  );

  const form = el("form", { class: "judgement" });
  for (const criterion of view.criteria) {
    if (criterion.code === ANSWER_CRITERIA[0]) {
      const shortcut = el(
        "button",
        { type: "button", class: "shortcut", title: texts.shortcutHint },
        texts.shortcut,
      );
      shortcut.addEventListener("click", () => {
        for (const code of ANSWER_CRITERIA) {
          const row = rows.get(code);
          row?.classList.remove("missing");
          const radio = row?.querySelector<HTMLInputElement>('input[value="1"]');
          if (radio) {
            radio.checked = true;
          }
        }
        view.onShortcut();
      });
      form.append(shortcut);
    }
    form.append(criterionRow(view, criterion, rows));
  }

  const error = el("p", { class: "error", hidden: "" }, texts.missing);
  const actions = el("div", { class: "actions" });
  if (view.review && view.canGoBack) {
    const back = el("button", { type: "button" }, texts.back);
    back.addEventListener("click", view.onBack);
    actions.append(back);
  }
  actions.append(el("button", { type: "submit", class: "primary" }, texts.submit));
  form.append(error, actions);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    view.onSubmit();
  });

  host.append(
    header(
      texts,
      view.lang,
      texts.progress(view.judged, view.total),
      view.guidelineText,
    ),
    el("main", { class: "card" }, item, form),
  );

  return {
    highlightMissing(codes: CriterionCode[]): void {
      for (const row of rows.values()) {
        row.classList.remove("missing");
      }
      for (const code of codes) {
        rows.get(code)?.classList.add("missing");
      }
      error.hidden = codes.length === 0;
      rows.get(codes[0] ?? "")?.scrollIntoView({ block: "center" });
    },
  };
}

export interface Banner {
  show(message: string, onRetry: () => void): void;
  clear(): void;
}

/** Offline/retry banner mounted above the screen; drafts stay untouched. */
export function createBanner(host: HTMLElement, texts: UiText): Banner {
  return {
    show(message: string, onRetry: () => void): void {
      clear(host);
      const retry = el("button", { type: "button" }, texts.retry);
      retry.addEventListener("click", () => {
        clear(host);
        onRetry();
      });
      host.append(el("div", { class: "banner" }, el("span", {}, message), retry));
    },
    clear(): void {
      clear(host);
    },
  };
}
