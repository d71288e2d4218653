// Shared test fixture: an SDF payload shaped like the bundled recycling
// schema (one root, three subevents, five leaf stubs).

import type { LibraryPayload } from '../src/types.js';

export function recyclingLibrary(): LibraryPayload {
  return {
    '@context': [],
    events: [
      {
        '@id': 'ev1',
        name: 'lithium-ion recycling',
        description: 'Methods for recycling lithium-ion batteries.',
        participants: [
          { event_id: 'ev1.1', importance: 1.0 },
          { event_id: 'ev1.2', importance: 1.0 },
          { event_id: 'ev1.3', importance: 1.0 },
        ],
        gate: 'or',
      },
      {
        '@id': 'ev1.1',
        name: 'pyrometallurgical',
        description: 'Employs extreme heat.',
        participants: [
          { event_id: 'ev1.1.1', importance: 1.0 },
          { event_id: 'ev1.1.2', importance: 0.5 },
          { event_id: 'ev1.1.3', importance: 0.5 },
          { event_id: 'ev1.1.4', importance: 0.5 },
          { event_id: 'ev1.1.5', importance: 0.5 },
        ],
        gate: 'and',
      },
      { '@id': 'ev1.1.1', name: 'metal oxides', description: '', participants: [], gate: 'none' },
      { '@id': 'ev1.1.2', name: 'cobalt', description: '', participants: [], gate: 'none' },
      { '@id': 'ev1.1.3', name: 'copper', description: '', participants: [], gate: 'none' },
      { '@id': 'ev1.1.4', name: 'iron', description: '', participants: [], gate: 'none' },
      { '@id': 'ev1.1.5', name: 'nickel alloys', description: '', participants: [], gate: 'none' },
      { '@id': 'ev1.2', name: 'hydrometallurgy', description: 'Uses aqueous solutions.', participants: [], gate: 'none' },
      { '@id': 'ev1.3', name: 'bioleaching', description: 'Uses bacteria.', participants: [], gate: 'none' },
    ],
    relations: [
      { relationSubject: 'ev1.1', relationObject: 'ev1.3' },
      { relationSubject: 'ev1.2', relationObject: 'ev1.3' },
      { relationSubject: 'ev1.1.1', relationObject: 'ev1.1.2' },
      { relationSubject: 'ev1.1.1', relationObject: 'ev1.1.3' },
      { relationSubject: 'ev1.1.1', relationObject: 'ev1.1.4' },
      { relationSubject: 'ev1.1.1', relationObject: 'ev1.1.5' },
    ],
  };
}
