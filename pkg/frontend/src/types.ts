// Payload shapes mirrored from the HTTP service.

export interface ParticipantPayload {
  event_id: string;
  importance: number;
}

export interface EventPayload {
  '@id': string;
  name: string;
  description: string;
  participants: ParticipantPayload[];
  gate: 'and' | 'or' | 'xor' | 'none';
}

export interface LibraryPayload {
  '@context': string[];
  events: EventPayload[];
  relations: { relationSubject: string; relationObject: string }[];
}

export interface SchemaResponse {
  schema_id: string;
  version: number;
  current_version: number;
  locked_by: string | null;
  library: LibraryPayload;
}

export interface LockResponse {
  token: string;
  holder: string;
  expires: number;
}

export type NodeStateName = 'matched' | 'predicted' | 'not_predicted';

export interface RunNode {
  id: string;
  state: NodeStateName;
  score: number;
  inherited_arguments: string[];
}

export interface RunReport {
  nodes: RunNode[];
  applied_rules: { rule: string; node: string; iteration: number }[];
  matches: { extracted_id: string; schema_id: string; composite: number }[];
  unmatched_extracted: string[];
  consistency: { ok: boolean; gate_violations: string[][]; temporal_violations: string[][] };
}

export interface RunResponse {
  id: string;
  schema_id: string;
  schema_version: number;
  extraction_id: string | null;
  config: { stages: string; seed: number; threshold: number };
  report: RunReport;
  prf?: { precision: number; recall: number; fscore: number };
}

export interface EvaluateResponse {
  precision: number;
  recall: number;
  fscore: number;
  matched: number;
  total_learned: number;
  total_gold: number;
  mapping: Record<string, string>;
}

export interface ServiceError {
  code: string;
  message: string;
  detail: unknown;
}
