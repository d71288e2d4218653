// Run submission and the prediction view model: node states, score panel,
// audit list. Pure view-model builders here; DOM work stays in main.ts.

import type { NodeStateName, RunResponse } from './types.js';

export interface RunViewModel {
  runId: string;
  schemaVersion: number;
  states: Map<string, NodeStateName>;
  matchedCount: number;
  predictedCount: number;
  audit: string[];
  prf: { precision: number; recall: number; fscore: number } | null;
  consistencyOk: boolean;
  inheritedArguments: Map<string, string[]>;
}

export function buildRunView(run: RunResponse): RunViewModel {
  const states = new Map<string, NodeStateName>();
  const inherited = new Map<string, string[]>();
  let matched = 0;
  let predicted = 0;
  for (const node of run.report.nodes) {
    states.set(node.id, node.state);
    if (node.state === 'matched') matched += 1;
    if (node.state === 'predicted') predicted += 1;
    if (node.inherited_arguments.length > 0) {
      inherited.set(node.id, node.inherited_arguments);
    }
  }
  return {
    runId: run.id,
    schemaVersion: run.schema_version,
    states,
    matchedCount: matched,
    predictedCount: predicted,
    audit: run.report.applied_rules.map(
      (entry) => `sweep ${entry.iteration}: ${entry.rule} forced ${entry.node}`,
    ),
    prf: run.prf ?? null,
    consistencyOk: run.report.consistency.ok,
    inheritedArguments: inherited,
  };
}

export function formatPrf(prf: { precision: number; recall: number; fscore: number } | null): string {
  if (!prf) {
    return 'no gold provided';
  }
  const fmt = (v: number) => v.toFixed(3);
  return `P ${fmt(prf.precision)}  R ${fmt(prf.recall)}  F ${fmt(prf.fscore)}`;
}

export function validateReportText(text: string): string | null {
  if (text.trim().length === 0) {
    return 'paste a news report before submitting';
  }
  return null;
}

export function reportToDocument(text: string, docId: string): { id: string; paragraphs: string[] } {
  const paragraphs = text
    .split(/\n\s*\n/)
    .map((p) => p.trim())
    .filter((p) => p.length > 0);
  return { id: docId, paragraphs };
}
