// Page wiring: schema picker, collapsible tree, node editor, report
// submission, and the run view. All numbers shown come verbatim from the
// service; nothing is recomputed client-side.

import { ApiClient } from './api.js';
import { renderEditor } from './editor.js';
import { buildTree, renderTree } from './tree.js';
import { formatPrf } from './runs.js';
import { describe, Session } from './state.js';

const api = new ApiClient('..');
const session = new Session(api);

const el = (id: string) => document.getElementById(id)!;

const expanded = new Set<string>();
let selectedNode: string | null = null;

function showBanner(): void {
  const banner = el('banner');
  if (!session.banner) {
    banner.className = 'banner hidden';
    banner.textContent = '';
    return;
  }
  banner.className = `banner banner-${session.banner.kind}`;
  banner.textContent = session.banner.text;
}

function refreshTree(): void {
  if (!session.library) {
    return;
  }
  const states = session.lastRun ? session.lastRun.states : new Map();
  renderTree(el('tree'), buildTree(session.library), { onSelect: selectNode }, states, expanded);
  el('schema-meta').textContent = session.schemaId
    ? `${session.schemaId}  v${session.version}${session.readOnly ? '  (read-only)' : ''}${session.dirty.size ? '  unsaved edits' : ''}`
    : '';
}

function selectNode(nodeId: string): void {
  selectedNode = nodeId;
  if (!session.library) {
    return;
  }
  const event = session.library.events.find((e) => e['@id'] === nodeId);
  if (!event) {
    return;
  }
  const names = new Map(session.library.events.map((e) => [e['@id'], e.name]));
  renderEditor(el('editor'), event, names, {
    onSave: async (edit) => {
      try {
        await session.edit(nodeId, edit);
        await session.save();
        await session.load(session.schemaId!);
      } catch (err) {
        session.banner = { kind: 'error', text: describe(err) };
      }
      showBanner();
      refreshTree();
    },
  });
}

function refreshRunView(): void {
  const view = session.lastRun;
  const panel = el('run-panel');
  if (!view) {
    panel.classList.add('hidden');
    return;
  }
  panel.classList.remove('hidden');
  el('run-meta').textContent = `run ${view.runId} on v${view.schemaVersion}: ` +
    `${view.matchedCount} matched, ${view.predictedCount} predicted` +
    (view.consistencyOk ? '' : '  (consistency violations)');
  el('prf').textContent = formatPrf(view.prf);
  const audit = el('audit');
  audit.innerHTML = '';
  for (const line of view.audit) {
    const item = document.createElement('li');
    item.textContent = line;
    audit.appendChild(item);
  }
  refreshTree(); // recolor with node states
}

async function loadSchema(schemaId: string): Promise<void> {
  try {
    await session.load(schemaId);
  } catch {
    // banner already set
  }
  showBanner();
  refreshTree();
  el('editor').innerHTML = '';
  selectedNode = null;
}

async function init(): Promise<void> {
  const picker = el('schema-picker') as HTMLSelectElement;
  try {
    const listing = await api.listSchemas();
    picker.innerHTML = '';
    for (const schema of listing.schemas) {
      const option = document.createElement('option');
      option.value = schema.schema_id;
      option.textContent = `${schema.schema_id} (v${schema.version})`;
      picker.appendChild(option);
    }
    if (listing.schemas.length > 0) {
      await loadSchema(listing.schemas[0].schema_id);
    } else {
      session.banner = { kind: 'info', text: 'no schemas stored yet; create one via the API or CLI' };
      showBanner();
    }
  } catch (err) {
    session.banner = { kind: 'error', text: describe(err) };
    showBanner();
  }

  picker.addEventListener('change', () => loadSchema(picker.value));
  el('reload').addEventListener('click', () => {
    if (session.schemaId) loadSchema(session.schemaId);
  });

  el('submit-report').addEventListener('click', async () => {
    const text = (el('report-text') as HTMLTextAreaElement).value;
    const gazetteer = (el('gazetteer-text') as HTMLTextAreaElement).value;
    if (text.trim().length === 0) {
      session.banner = { kind: 'error', text: 'paste a news report before submitting' };
      showBanner();
      return;
    }
    try {
      await session.submitReport(text, {
        gazetteer,
        stages: 'full',
        min_sim: 0.25,
        text_source: 'name',
        epochs: 80,
      });
      session.banner = { kind: 'info', text: `analysis complete: run ${session.lastRun!.runId}` };
    } catch (err) {
      session.banner = { kind: 'error', text: describe(err) };
    }
    showBanner();
    refreshRunView();
  });

  el('regenerate').addEventListener('click', async () => {
    const goldId = (el('gold-schema') as HTMLInputElement).value.trim();
    if (!goldId) {
      session.banner = { kind: 'error', text: 'name a gold schema id to evaluate against' };
      showBanner();
      return;
    }
    try {
      await session.regenerateEvaluation({ schema_id: goldId });
      session.banner = { kind: 'info', text: 'evaluation refreshed against the current schema version' };
    } catch (err) {
      session.banner = { kind: 'error', text: describe(err) };
    }
    showBanner();
    refreshRunView();
  });
}

document.addEventListener('DOMContentLoaded', () => {
  void init();
});
