// Node editing: client-side field validation and assembling the updated
// library payload for a PUT. Validation mirrors the server's rules so
// obvious mistakes never leave the browser.

import type { EventPayload, LibraryPayload } from './types.js';

export interface NodeEdit {
  name?: string;
  description?: string;
  gate?: string;
  importances?: Record<string, number>; // participant event id -> new importance
}

export interface FieldError {
  field: string;
  message: string;
}

const GATES = new Set(['and', 'or', 'xor', 'none']);

export function validateEdit(edit: NodeEdit): FieldError[] {
  const errors: FieldError[] = [];
  if (edit.name !== undefined && edit.name.trim() === '') {
    errors.push({ field: 'name', message: 'name must not be empty' });
  }
  if (edit.gate !== undefined && !GATES.has(edit.gate)) {
    errors.push({ field: 'gate', message: `gate must be one of and, or, xor, none` });
  }
  for (const [childId, importance] of Object.entries(edit.importances ?? {})) {
    if (Number.isNaN(importance) || importance < 0 || importance > 1) {
      errors.push({ field: `importance:${childId}`, message: 'importance must be between 0 and 1' });
    }
  }
  return errors;
}

export function applyEdit(library: LibraryPayload, nodeId: string, edit: NodeEdit): LibraryPayload {
  const events = library.events.map((event): EventPayload => {
    if (event['@id'] !== nodeId) {
      return event;
    }
    return {
      ...event,
      name: edit.name ?? event.name,
      description: edit.description ?? event.description,
      gate: (edit.gate ?? event.gate) as EventPayload['gate'],
      participants: event.participants.map((part) =>
        edit.importances && part.event_id in edit.importances
          ? { ...part, importance: edit.importances[part.event_id] }
          : part,
      ),
    };
  });
  return { ...library, events };
}

export interface EditorCallbacks {
  onSave: (edit: NodeEdit) => void;
}

export function renderEditor(
  container: HTMLElement,
  event: EventPayload,
  childNames: Map<string, string>,
  callbacks: EditorCallbacks,
): void {
  container.innerHTML = '';
  const form = document.createElement('form');
  form.className = 'node-editor';

  const heading = document.createElement('h3');
  heading.textContent = `Edit ${event['@id']}`;
  form.appendChild(heading);

  const nameInput = field(form, 'Name', 'name', event.name);
  const descInput = textArea(form, 'Description', 'description', event.description);

  const gateSelect = document.createElement('select');
  gateSelect.name = 'gate';
  for (const gate of ['and', 'or', 'xor', 'none']) {
    const option = document.createElement('option');
    option.value = gate;
    option.textContent = gate;
    option.selected = gate === event.gate;
    gateSelect.appendChild(option);
  }
  labelled(form, 'Gate', gateSelect);

  const importanceInputs = new Map<string, HTMLInputElement>();
  for (const part of event.participants) {
    const input = document.createElement('input');
    input.type = 'number';
    input.step = '0.05';
    input.min = '0';
    input.max = '1';
    input.value = String(part.importance);
    input.name = `importance:${part.event_id}`;
    importanceInputs.set(part.event_id, input);
    labelled(form, `${childNames.get(part.event_id) ?? part.event_id} importance`, input);
  }

  const errorBox = document.createElement('div');
  errorBox.className = 'field-errors';
  form.appendChild(errorBox);

  const save = document.createElement('button');
  save.type = 'submit';
  save.textContent = 'Save';
  form.appendChild(save);

  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const edit: NodeEdit = {
      name: nameInput.value,
      description: descInput.value,
      gate: gateSelect.value,
      importances: Object.fromEntries(
        [...importanceInputs.entries()].map(([cid, input]) => [cid, Number(input.value)]),
      ),
    };
    const errors = validateEdit(edit);
    errorBox.innerHTML = '';
    if (errors.length > 0) {
      for (const error of errors) {
        const line = document.createElement('p');
        line.className = 'field-error';
        line.textContent = `${error.field}: ${error.message}`;
        errorBox.appendChild(line);
      }
      return;
    }
    callbacks.onSave(edit);
  });

  container.appendChild(form);
}

function field(form: HTMLFormElement, labelText: string, name: string, value: string): HTMLInputElement {
  const input = document.createElement('input');
  input.type = 'text';
  input.name = name;
  input.value = value;
  labelled(form, labelText, input);
  return input;
}

function textArea(form: HTMLFormElement, labelText: string, name: string, value: string): HTMLTextAreaElement {
  const input = document.createElement('textarea');
  input.name = name;
  input.value = value;
  labelled(form, labelText, input);
  return input;
}

function labelled(form: HTMLFormElement, text: string, control: HTMLElement): void {
  const label = document.createElement('label');
  const span = document.createElement('span');
  span.textContent = text;
  label.appendChild(span);
  label.appendChild(control);
  form.appendChild(label);
}
