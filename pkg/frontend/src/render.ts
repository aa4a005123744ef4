/** Pure HTML builders. Every function maps API data to markup and nothing
 * else: no fetching, no state, no coding logic. Question widgets derive
 * solely from `interaction.type` and `allowed_answers`. */

import type {
  CodeDetails,
  Interaction,
  ProgressEntry,
  RelatedTerm,
  SearchResult,
  Section,
} from "./types.js";
import type { Selection, UiSession } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function attr(text: string): string {
  return escapeHtml(text);
}

// ---------------------------------------------------------------------------
// search page
// ---------------------------------------------------------------------------

export function renderSuggestions(suggestions: string[]): string {
  if (suggestions.length === 0) {
    return "";
  }
  const items = suggestions
    .map(
      (s) =>
        `<li class="suggestion" role="option" data-suggestion="${attr(s)}">${escapeHtml(s)}</li>`,
    )
    .join("");
  return `<ul class="suggestions" role="listbox">${items}</ul>`;
}

export function renderRelatedTerms(terms: RelatedTerm[]): string {
  if (terms.length === 0) {
    return `<p class="empty">Nessun termine correlato</p>`;
  }
  const items = terms
    .map(
      (t) =>
        `<button class="related-term" data-term="${attr(t.token)}">` +
        `${escapeHtml(t.token)} <span class="count">${t.count}</span></button>`,
    )
    .join("");
  return `<div class="related-terms">${items}</div>`;
}

/** Symbols summarizing a result's details; silent until details arrive. */
export function renderDetailSymbols(details: CodeDetails | undefined): string {
  if (details === undefined) {
    return "";
  }
  const symbols: string[] = [];
  if (details.is_leaf) {
    symbols.push(`<span class="symbol leaf" title="codice foglia">&#10003;</span>`);
  }
  if (details.exclusions.length > 0) {
    symbols.push(`<span class="symbol exclusions" title="esclusioni">&#9888;</span>`);
  }
  if (details.basic_disease.length > 0) {
    symbols.push(
      `<span class="symbol basic-disease" title="codificare prima la malattia di base">&#8593;</span>`,
    );
  }
  if (details.use_additional_code.length > 0) {
    symbols.push(
      `<span class="symbol additional-code" title="utilizzare un codice aggiuntivo">&#43;</span>`,
    );
  }
  return symbols.join("");
}

export function renderResults(
  results: SearchResult[],
  detailsByCode: Map<string, CodeDetails>,
): string {
  if (results.length === 0) {
    return `<p class="empty">Nessun risultato</p>`;
  }
  const rows = results
    .map(
      (r) =>
        `<tr class="result" data-code="${attr(r.code)}">` +
        `<td class="code">${escapeHtml(r.code)}</td>` +
        `<td class="title">${escapeHtml(r.title)}</td>` +
        `<td class="score">${r.score}</td>` +
        `<td class="symbols">${renderDetailSymbols(detailsByCode.get(r.code))}</td>` +
        `<td><button class="select-code" data-code="${attr(r.code)}">Seleziona</button></td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="results"><thead><tr>` +
    `<th>Codice</th><th>Titolo</th><th>Punteggio</th><th></th><th></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function renderSelectionList(
  section: Section,
  heading: string,
  items: Selection[],
): string {
  const rows = items
    .map(
      (item) =>
        `<li>${escapeHtml(item.code)} ${escapeHtml(item.title)} ` +
        `<button class="remove-code" data-section="${section}" data-code="${attr(item.code)}">&times;</button></li>`,
    )
    .join("");
  return (
    `<section class="selected" data-section="${section}">` +
    `<h3>${escapeHtml(heading)}</h3>` +
    (items.length > 0 ? `<ul>${rows}</ul>` : `<p class="empty">Nessun codice</p>`) +
    `</section>`
  );
}

export function renderSelectedLists(state: UiSession): string {
  return (
    renderSelectionList("diagnoses", "Diagnosi selezionate", state.selectedDiagnoses) +
    renderSelectionList("procedures", "Procedure selezionate", state.selectedProcedures)
  );
}

export function renderError(message: string): string {
  return `<div class="error" role="alert">${escapeHtml(message)}</div>`;
}

// ---------------------------------------------------------------------------
// decision page
// ---------------------------------------------------------------------------

function renderChoice(
  kind: "radio" | "checkbox",
  name: string,
  value: string,
): string {
  return (
    `<label class="choice">` +
    `<input type="${kind}" name="${attr(name)}" value="${attr(value)}">` +
    ` ${escapeHtml(value)}</label>`
  );
}

/** The live question panel, generated only from type + allowed answers. */
export function renderQuestion(interaction: Interaction): string {
  if (interaction.type === "result") {
    return renderVerdict(interaction);
  }
  const allowed = interaction.allowed_answers ?? [];
  const kind = interaction.type === "ask_multicode" ? "checkbox" : "radio";
  const name = `answer-${interaction.state}`;
  const choices = allowed.map((a) => renderChoice(kind, name, a)).join("");
  return (
    `<form class="question" data-state="${interaction.state}" data-type="${interaction.type}">` +
    `<p class="message">${escapeHtml(interaction.message)}</p>` +
    `<div class="choices" role="${kind === "radio" ? "radiogroup" : "group"}">${choices}</div>` +
    `<button type="submit" class="answer">Conferma</button>` +
    `</form>`
  );
}

export function renderVerdict(interaction: Interaction): string {
  const codes = (interaction.verdict ?? [])
    .map((code) => `<li class="verdict-code">${escapeHtml(code)}</li>`)
    .join("");
  return (
    `<section class="verdict">` +
    `<h3>${escapeHtml(interaction.message)}</h3>` +
    `<ul>${codes}</ul>` +
    `</section>`
  );
}

export function renderProgress(progress: ProgressEntry[]): string {
  const items = progress
    .map(
      (entry) =>
        `<li class="stage ${entry.status}" data-node="${entry.node_id}">${escapeHtml(entry.label)}</li>`,
    )
    .join("");
  return `<ol class="progress">${items}</ol>`;
}
