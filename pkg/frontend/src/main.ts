/** Entry point: wires the session, the API client and the screens together. */

import { ApiError, SurveyApi } from "./api.js";
import { Session } from "./session.js";
import type { Lang, TriplePayload } from "./types.js";
import { applyIncomprehensibleShortcut, isComplete, missingCriteria } from "./validation.js";
import {
  createBanner,
  renderDone,
  renderGuidelines,
  renderJudgePrompt,
  renderTriple,
  UI_TEXT,
} from "./view.js";

const params = new URLSearchParams(window.location.search);
const lang: Lang = params.get("lang") === "en" ? "en" : "sv";
const review = params.get("review") === "1";
const texts = UI_TEXT[lang];

document.documentElement.lang = lang;
document.title = texts.title;

const app = document.getElementById("app") as HTMLElement;
const bannerHost = document.createElement("div");
const screen = document.createElement("div");
app.append(bannerHost, screen);
const banner = createBanner(bannerHost, texts);

const api = new SurveyApi();
let session: Session;

/** Run an API call behind the retry banner; null means "banner shown". */
async function guarded<T>(op: () => Promise<T>, retry: () => void): Promise<T | null> {
  try {
    banner.clear();
    return await op();
  } catch (err) {
    banner.show(err instanceof ApiError ? err.message : texts.offline, retry);
    return null;
  }
}

function fetchTriple(tripleId: string): Promise<TriplePayload | null> {
  return guarded(
    () => api.triple(tripleId),
    () => void showCurrent(),
  );
}

async function showCurrent(): Promise<void> {
  if (session.done) {
    renderDone(screen, texts, lang);
    return;
  }
  const tripleId = session.current as string;
  const payload = await fetchTriple(tripleId);
  if (payload === null) {
    return;
  }
  const view = renderTriple(screen, {
    texts,
    lang,
    triple: payload.triple,
    criteria: payload.criteria,
    guidelineText: payload.guidelines[lang],
    draft: session.getDraft(tripleId),
    judged: session.judgedCount,
    total: session.total,
    review,
    canGoBack: session.position > 0,
    onScore: (code, value) => {
      session.setDraftScore(tripleId, code, value);
    },
    onShortcut: () => {
      const filled = applyIncomprehensibleShortcut(session.getDraft(tripleId));
      for (const [code, value] of Object.entries(filled)) {
        session.setDraftScore(tripleId, code as keyof typeof filled, value);
      }
    },
    onSubmit: () => void submitCurrent(tripleId),
    onBack: () => {
      session.goBack();
      void showCurrent();
    },
  });

  async function submitCurrent(id: string): Promise<void> {
    const draft = session.getDraft(id);
    const missing = missingCriteria(draft);
    if (!isComplete(draft)) {
      view.highlightMissing(missing);
      return;
    }
    view.highlightMissing([]);
    const record = await guarded(
      () => api.submitJudgement(session.judgeId, id, draft),
      () => void submitCurrent(id),
    );
    if (record === null) {
      return; // banner shown; draft untouched
    }
    session.markJudged(id);
    await showCurrent();
  }
}

async function boot(): Promise<void> {
  const judgeId = (params.get("judge") ?? "").trim();
  if (judgeId === "") {
    renderJudgePrompt(screen, texts, lang, (entered) => {
      params.set("judge", entered);
      window.location.search = params.toString();
    });
    return;
  }
  const info = await guarded(() => api.session(judgeId), () => void boot());
  if (info === null) {
    return;
  }
  session = new Session(info, window.localStorage);
  if (session.done) {
    renderDone(screen, texts, lang);
    return;
  }
  // guidelines come up before the first triple of every visit
  const payload = await fetchTriple(session.current as string);
  if (payload === null) {
    return;
  }
  renderGuidelines(screen, texts, lang, payload.guidelines[lang], () => {
    void showCurrent();
  });
}

void boot();
