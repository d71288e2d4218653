// Session state for the curation loop: which schema is loaded, the lock
// we hold (if any), unsaved edits, and the latest run. No DOM here; the
// transitions are what the tests pin down.

import { ApiClient, ApiError } from './api.js';
import { applyEdit, NodeEdit, validateEdit } from './editor.js';
import { buildRunView, reportToDocument, RunViewModel } from './runs.js';
import type { LibraryPayload } from './types.js';

export interface Banner {
  kind: 'info' | 'error' | 'locked';
  text: string;
}

export class Session {
  schemaId: string | null = null;
  version = 0;
  library: LibraryPayload | null = null;
  lockToken: string | null = null;
  lockedBy: string | null = null;
  dirty = new Set<string>();
  lastRun: RunViewModel | null = null;
  banner: Banner | null = null;

  constructor(
    private api: ApiClient,
    public holder: string = 'browser',
  ) {}

  get readOnly(): boolean {
    return this.lockedBy !== null && this.lockToken === null;
  }

  async load(schemaId: string): Promise<void> {
    try {
      const response = await this.api.getSchema(schemaId);
      this.schemaId = response.schema_id;
      this.version = response.current_version;
      this.library = response.library;
      this.lockedBy = response.locked_by;
      this.dirty.clear();
      this.banner =
        response.locked_by !== null
          ? { kind: 'locked', text: `read-only: locked by ${response.locked_by}` }
          : null;
    } catch (err) {
      this.banner = { kind: 'error', text: describe(err) };
      throw err;
    }
  }

  async edit(nodeId: string, edit: NodeEdit): Promise<void> {
    if (!this.library || !this.schemaId) {
      throw new Error('no schema loaded');
    }
    const errors = validateEdit(edit);
    if (errors.length > 0) {
      throw new Error(errors.map((e) => `${e.field}: ${e.message}`).join('; '));
    }
    if (this.lockToken === null) {
      const lock = await this.api.acquireLock(this.schemaId, this.holder);
      this.lockToken = lock.token;
      this.lockedBy = lock.holder;
    }
    this.library = applyEdit(this.library, nodeId, edit);
    this.dirty.add(nodeId);
  }

  async save(): Promise<number> {
    if (!this.library || !this.schemaId || this.lockToken === null) {
      throw new Error('nothing to save or no lock held');
    }
    try {
      const saved = await this.api.putSchema(this.schemaId, this.library, this.lockToken, this.holder);
      this.version = saved.version;
      this.dirty.clear();
      this.lockToken = null; // the service releases the lock on put
      this.lockedBy = null;
      this.banner = { kind: 'info', text: `saved version ${saved.version}` };
      return saved.version;
    } catch (err) {
      if (err instanceof ApiError && err.code === 'BadToken') {
        this.lockToken = null;
        this.banner = { kind: 'error', text: 'lock lost: your edits are kept locally, re-acquire and save again' };
      } else if (err instanceof ApiError && err.code === 'ValidationFailed') {
        this.banner = { kind: 'error', text: `rejected by validation: ${err.message}` };
      } else {
        this.banner = { kind: 'error', text: describe(err) };
      }
      throw err; // local state (library + dirty flags) is intentionally kept
    }
  }

  async submitReport(text: string, config: Record<string, unknown> = {}): Promise<RunViewModel> {
    if (!this.schemaId) {
      throw new Error('no schema loaded');
    }
    const run = await this.api.submitRun({
      schema_id: this.schemaId,
      document: reportToDocument(text, `report-${Date.now()}`),
      gazetteer: (config.gazetteer as string) ?? '',
      config: { ...config, gazetteer: undefined },
    });
    this.lastRun = buildRunView(run);
    return this.lastRun;
  }

  async regenerateEvaluation(gold: unknown): Promise<{ precision: number; recall: number; fscore: number }> {
    if (!this.schemaId) {
      throw new Error('no schema loaded');
    }
    const result = await this.api.evaluate({ schema_id: this.schemaId }, gold);
    if (this.lastRun) {
      this.lastRun = { ...this.lastRun, prf: result };
    }
    return result;
  }
}

export function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return String(err instanceof Error ? err.message : err);
}
