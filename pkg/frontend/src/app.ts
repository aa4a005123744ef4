/** Browser bootstrap: routing, events, and API wiring. All rendering goes
 * through the pure builders in render.ts; all data comes from the API. */

import { ApiClient, ApiError } from "./api.js";
import {
  addSelection,
  canStartDecision,
  emptySession,
  removeSelection,
  selectedCodes,
  type UiSession,
} from "./state.js";
import {
  renderError,
  renderProgress,
  renderQuestion,
  renderRelatedTerms,
  renderResults,
  renderSelectedLists,
  renderSuggestions,
} from "./render.js";
import type {
  CodeDetails,
  SearchResponse,
  Section,
  SessionPayload,
} from "./types.js";

const api = new ApiClient();
const ui: UiSession = emptySession();

let section: Section = "diagnoses";
let lastSearch: SearchResponse | null = null;
let session: SessionPayload | null = null;
const detailsByCode = new Map<string, CodeDetails>();

const DETAIL_SYMBOL_LIMIT = 20;

function $(selector: string): HTMLElement {
  const element = document.querySelector(selector);
  if (!(element instanceof HTMLElement)) {
    throw new Error(`missing element ${selector}`);
  }
  return element;
}

function showError(error: unknown): void {
  const message =
    error instanceof ApiError
      ? error.body.message
      : error instanceof Error
        ? error.message
        : String(error);
  $("#errors").innerHTML = renderError(message);
}

function clearError(): void {
  $("#errors").innerHTML = "";
}

// ---------------------------------------------------------------------------
// search page
// ---------------------------------------------------------------------------

function queryInput(): HTMLInputElement {
  return $("#query") as HTMLInputElement;
}

async function runSearch(): Promise<void> {
  const q = queryInput().value.trim();
  if (q === "") {
    return;
  }
  clearError();
  $("#suggestions").innerHTML = "";
  try {
    lastSearch = await api.search(section, q);
    detailsByCode.clear();
    renderSearchResults();
    await loadDetailSymbols();
  } catch (error) {
    showError(error);
  }
}

function renderSearchResults(): void {
  if (lastSearch === null) {
    return;
  }
  $("#results").innerHTML = renderResults(lastSearch.results, detailsByCode);
  $("#related").innerHTML = renderRelatedTerms(lastSearch.related_terms);
}

async function loadDetailSymbols(): Promise<void> {
  if (lastSearch === null) {
    return;
  }
  const visible = lastSearch.results.slice(0, DETAIL_SYMBOL_LIMIT);
  await Promise.all(
    visible.map(async (result) => {
      try {
        detailsByCode.set(
          result.code,
          await api.codeDetails(section, result.code),
        );
      } catch {
        // symbols are a convenience; the row renders without them
      }
    }),
  );
  renderSearchResults();
}

let debounceTimer: number | undefined;

async function refreshSuggestions(): Promise<void> {
  const q = queryInput().value.trim();
  if (q === "") {
    $("#suggestions").innerHTML = "";
    return;
  }
  try {
    const suggestions = await api.autocomplete(section, q);
    $("#suggestions").innerHTML = renderSuggestions(suggestions);
  } catch {
    $("#suggestions").innerHTML = "";
  }
}

async function selectCode(code: string): Promise<void> {
  clearError();
  try {
    const details = await api.codeDetails(
      section,
      code,
      selectedCodes(ui, section),
    );
    const conflict = details.alerts.find((a) => a.kind === "ExclusionConflict");
    if (conflict !== undefined) {
      showError(conflict.message);
      return;
    }
    const blocker = addSelection(ui, details);
    if (blocker !== null) {
      showError(blocker);
      return;
    }
    renderSelections();
  } catch (error) {
    showError(error);
  }
}

function renderSelections(): void {
  $("#selections").innerHTML = renderSelectedLists(ui);
  const start = $("#start-decision") as HTMLButtonElement;
  start.disabled = !canStartDecision(ui);
}

// ---------------------------------------------------------------------------
// decision page
// ---------------------------------------------------------------------------

function renderSession(): void {
  if (session === null) {
    return;
  }
  $("#decision-selections").innerHTML = renderSelectedLists(ui);
  $("#question").innerHTML = session.interaction
    ? renderQuestion(session.interaction)
    : "";
  $("#progress").innerHTML = session.progress
    ? renderProgress(session.progress)
    : "";
}

async function startDecision(): Promise<void> {
  clearError();
  try {
    session = await api.startSession(
      selectedCodes(ui, "diagnoses"),
      selectedCodes(ui, "procedures"),
    );
    ui.sessionId = session.session_id;
    renderSession();
  } catch (error) {
    showError(error);
    window.location.hash = "#/search";
  }
}

function collectAnswer(form: HTMLFormElement): string | string[] | null {
  const type = form.dataset.type;
  const checked = Array.from(
    form.querySelectorAll<HTMLInputElement>("input:checked"),
  ).map((input) => input.value);
  if (type === "ask_multicode") {
    return checked.length > 0 ? checked : null;
  }
  return checked.length === 1 ? (checked[0] ?? null) : null;
}

async function submitAnswer(form: HTMLFormElement): Promise<void> {
  if (session === null) {
    return;
  }
  const answer = collectAnswer(form);
  if (answer === null) {
    showError("Selezionare una risposta");
    return;
  }
  clearError();
  try {
    session = await api.answer(
      session.session_id,
      Number(form.dataset.state),
      answer,
    );
    renderSession();
  } catch (error) {
    if (
      error instanceof ApiError &&
      (error.status === 409 || error.status === 410)
    ) {
      await refreshSession(error.body.message);
      return;
    }
    showError(error);
  }
}

async function refreshSession(reason: string): Promise<void> {
  showError(`${reason} — ricarico la sessione`);
  if (ui.sessionId === null) {
    return;
  }
  try {
    session = await api.getSession(ui.sessionId);
    renderSession();
  } catch (error) {
    showError(error);
  }
}

async function cancelDecision(): Promise<void> {
  if (session !== null && session.status === "AwaitingAnswer") {
    try {
      await api.cancelSession(session.session_id);
    } catch {
      // leaving the page is the user's intent either way
    }
  }
  session = null;
  ui.sessionId = null;
  window.location.hash = "#/search";
}

// ---------------------------------------------------------------------------
// routing and events
// ---------------------------------------------------------------------------

function route(): void {
  const decision = window.location.hash === "#/decision";
  if (decision && !canStartDecision(ui)) {
    window.location.hash = "#/search";
    return;
  }
  $("#search-page").hidden = decision;
  $("#decision-page").hidden = !decision;
  clearError();
  if (decision) {
    void startDecision();
  } else {
    renderSelections();
  }
}

function wireEvents(): void {
  window.addEventListener("hashchange", route);

  $("#search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void runSearch();
  });

  queryInput().addEventListener("input", () => {
    window.clearTimeout(debounceTimer);
    debounceTimer = window.setTimeout(() => void refreshSuggestions(), 150);
  });

  $("#section-picker").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    section = input.value === "procedures" ? "procedures" : "diagnoses";
    void runSearch();
  });

  $("#search-page").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const suggestion = target.closest<HTMLElement>("[data-suggestion]");
    if (suggestion?.dataset.suggestion !== undefined) {
      queryInput().value = suggestion.dataset.suggestion;
      void runSearch();
      return;
    }
    const related = target.closest<HTMLElement>(".related-term");
    if (related?.dataset.term !== undefined) {
      queryInput().value = `${queryInput().value.trim()} ${related.dataset.term}`.trim();
      void runSearch();
      return;
    }
    const select = target.closest<HTMLElement>(".select-code");
    if (select?.dataset.code !== undefined) {
      void selectCode(select.dataset.code);
    }
  });

  document.body.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const remove = target.closest<HTMLElement>(".remove-code");
    if (remove?.dataset.code !== undefined && remove.dataset.section !== undefined) {
      removeSelection(
        ui,
        remove.dataset.section === "procedures" ? "procedures" : "diagnoses",
        remove.dataset.code,
      );
      renderSelections();
      if (window.location.hash === "#/decision") {
        renderSession();
      }
    }
  });

  $("#start-decision").addEventListener("click", () => {
    window.location.hash = "#/decision";
  });

  $("#cancel-decision").addEventListener("click", () => {
    void cancelDecision();
  });

  $("#decision-page").addEventListener("submit", (event) => {
    const form = event.target;
    if (form instanceof HTMLFormElement && form.classList.contains("question")) {
      event.preventDefault();
      void submitAnswer(form);
    }
  });
}

export function start(): void {
  wireEvents();
  route();
}

if (typeof document !== "undefined") {
  start();
}
