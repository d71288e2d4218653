import { describe, expect, it } from 'vitest';

import { applyEdit, validateEdit } from '../src/editor.js';
import { recyclingLibrary } from './fixtures.js';

describe('validateEdit', () => {
  it('accepts a plain description change', () => {
    expect(validateEdit({ description: 'new text' })).toEqual([]);
  });

  it('rejects an empty name', () => {
    const errors = validateEdit({ name: '   ' });
    expect(errors).toHaveLength(1);
    expect(errors[0].field).toBe('name');
  });

  it('rejects importance outside [0, 1] before anything is sent', () => {
    const errors = validateEdit({ importances: { 'ev1.1': 1.5 } });
    expect(errors).toHaveLength(1);
    expect(errors[0].field).toBe('importance:ev1.1');
  });

  it('rejects NaN importance', () => {
    expect(validateEdit({ importances: { 'ev1.1': Number.NaN } })).toHaveLength(1);
  });

  it('rejects unknown gate tokens', () => {
    expect(validateEdit({ gate: 'maybe' })).toHaveLength(1);
    expect(validateEdit({ gate: 'xor' })).toEqual([]);
  });
});

describe('applyEdit', () => {
  it('changes only the targeted node', () => {
    const library = recyclingLibrary();
    const updated = applyEdit(library, 'ev1.2', { description: 'edited' });
    expect(updated.events.find((e) => e['@id'] === 'ev1.2')!.description).toBe('edited');
    expect(updated.events.find((e) => e['@id'] === 'ev1')!.description)
      .toBe(library.events.find((e) => e['@id'] === 'ev1')!.description);
    // original untouched
    expect(library.events.find((e) => e['@id'] === 'ev1.2')!.description).toBe('Uses aqueous solutions.');
  });

  it('updates a single participant importance', () => {
    const updated = applyEdit(recyclingLibrary(), 'ev1.1', { importances: { 'ev1.1.2': 0.9 } });
    const pyro = updated.events.find((e) => e['@id'] === 'ev1.1')!;
    expect(pyro.participants.find((p) => p.event_id === 'ev1.1.2')!.importance).toBe(0.9);
    expect(pyro.participants.find((p) => p.event_id === 'ev1.1.3')!.importance).toBe(0.5);
  });

  it('keeps fields not named in the edit', () => {
    const updated = applyEdit(recyclingLibrary(), 'ev1', { name: 'battery recycling' });
    const root = updated.events.find((e) => e['@id'] === 'ev1')!;
    expect(root.name).toBe('battery recycling');
    expect(root.gate).toBe('or');
    expect(root.participants).toHaveLength(3);
  });
});
