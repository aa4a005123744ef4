/** Client-side selection state. The one rule the UI owns: only leaf codes
 * without blocking alerts may enter the selected lists; everything else
 * (ordering, alerts, allowed answers) arrives from the API verbatim. */

import type { CodeDetails, Section } from "./types.js";

export interface Selection {
  code: string;
  title: string;
}

export interface UiSession {
  selectedDiagnoses: Selection[];
  selectedProcedures: Selection[];
  sessionId: string | null;
}

export function emptySession(): UiSession {
  return { selectedDiagnoses: [], selectedProcedures: [], sessionId: null };
}

function listFor(state: UiSession, section: Section): Selection[] {
  return section === "diagnoses"
    ? state.selectedDiagnoses
    : state.selectedProcedures;
}

export function selectedCodes(state: UiSession, section: Section): string[] {
  return listFor(state, section).map((item) => item.code);
}

/** Why a code may not be added, or null when the addition is allowed. */
export function selectionBlocker(
  state: UiSession,
  details: CodeDetails,
): string | null {
  if (!details.is_leaf) {
    const alert = details.alerts.find((a) => a.kind === "NotLeaf");
    return alert ? alert.message : `${details.code} is not a leaf code`;
  }
  if (selectedCodes(state, details.section).includes(details.code)) {
    return `${details.code} is already selected`;
  }
  return null;
}

/** Add a code to its section's list; returns the blocking message instead
 * when the selection rule forbids it. */
export function addSelection(
  state: UiSession,
  details: CodeDetails,
): string | null {
  const blocker = selectionBlocker(state, details);
  if (blocker !== null) {
    return blocker;
  }
  listFor(state, details.section).push({
    code: details.code,
    title: details.title,
  });
  return null;
}

export function removeSelection(
  state: UiSession,
  section: Section,
  code: string,
): void {
  const list = listFor(state, section);
  const index = list.findIndex((item) => item.code === code);
  if (index >= 0) {
    list.splice(index, 1);
  }
}

/** The decision page needs at least one selected diagnosis. */
export function canStartDecision(state: UiSession): boolean {
  return state.selectedDiagnoses.length > 0;
}
