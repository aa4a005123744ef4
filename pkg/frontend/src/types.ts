/** Wire types, mirrored 1:1 from the service's JSON bodies. */

export type Section = "diagnoses" | "procedures";

export interface MatchedAttribute {
  kind: string;
  weight: number;
}

export interface SearchResult {
  code: string;
  title: string;
  score: number;
  matched: MatchedAttribute[];
}

export interface RelatedTerm {
  token: string;
  count: number;
}

export interface SearchResponse {
  section: Section;
  query: string[];
  results: SearchResult[];
  related_terms: RelatedTerm[];
}

export interface NoteRef {
  text: string;
  referenced_codes: string[];
}

export interface Alert {
  kind: string;
  subject_code: string;
  referenced_codes: string[];
  message: string;
}

export interface CodeDetails {
  section: Section;
  code: string;
  title: string;
  is_leaf: boolean;
  children: string[];
  exclusions: NoteRef[];
  use_additional_code: NoteRef[];
  basic_disease: NoteRef[];
  alerts: Alert[];
}

export type InteractionType =
  | "ask_binary"
  | "ask_single_code"
  | "ask_multicode"
  | "result";

export interface Interaction {
  id: string;
  state: number;
  message: string;
  type: InteractionType;
  allowed_answers?: string[];
  verdict?: string[];
}

export interface ProgressEntry {
  node_id: number;
  label: string;
  status: "done" | "current" | "pending";
}

export type SessionStatus = "AwaitingAnswer" | "Finished" | "Cancelled";

export interface SessionPayload {
  session_id: string;
  status: SessionStatus;
  pc: string[];
  pi: string[];
  interaction?: Interaction;
  verdict?: string[];
  progress?: ProgressEntry[];
}

export interface ErrorBody {
  error: string;
  message: string;
}
