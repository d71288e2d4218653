// Schema tree model and its collapsible DOM rendering. Model building is
// pure so it can be tested without a browser.

import type { LibraryPayload, NodeStateName } from './types.js';

export interface TreeNode {
  id: string;
  name: string;
  description: string;
  gate: string;
  importance: number | null; // importance as a participant of its parent
  children: TreeNode[];
}

function idSortKey(id: string): number[] {
  return id.slice(2).split('.').map((part) => Number(part));
}

export function compareIds(a: string, b: string): number {
  const ka = idSortKey(a);
  const kb = idSortKey(b);
  for (let i = 0; i < Math.max(ka.length, kb.length); i += 1) {
    const va = ka[i];
    const vb = kb[i];
    if (va === undefined) return -1;
    if (vb === undefined) return 1;
    if (va !== vb) return va - vb;
  }
  return 0;
}

export function buildTree(library: LibraryPayload): TreeNode[] {
  const byId = new Map(library.events.map((e) => [e['@id'], e]));
  const parentOf = new Map<string, string>();
  const importanceOf = new Map<string, number>();
  for (const event of library.events) {
    for (const part of event.participants) {
      if (!parentOf.has(part.event_id) && byId.has(part.event_id)) {
        parentOf.set(part.event_id, event['@id']);
        importanceOf.set(part.event_id, part.importance);
      }
    }
  }

  const build = (id: string): TreeNode => {
    const event = byId.get(id)!;
    const childIds = event.participants
      .map((p) => p.event_id)
      .filter((cid) => byId.has(cid) && parentOf.get(cid) === id);
    return {
      id,
      name: event.name,
      description: event.description,
      gate: event.gate,
      importance: importanceOf.get(id) ?? null,
      children: childIds.map(build),
    };
  };

  return library.events
    .map((e) => e['@id'])
    .filter((id) => !parentOf.has(id))
    .sort(compareIds)
    .map(build);
}

export function countNodes(roots: TreeNode[]): number {
  let total = 0;
  const walk = (node: TreeNode) => {
    total += 1;
    node.children.forEach(walk);
  };
  roots.forEach(walk);
  return total;
}

export interface TreeCallbacks {
  onSelect: (id: string) => void;
}

const STATE_CLASS: Record<NodeStateName, string> = {
  matched: 'node-matched',
  predicted: 'node-predicted',
  not_predicted: 'node-not-predicted',
};

export function stateClass(state: NodeStateName | undefined): string {
  return state ? STATE_CLASS[state] : '';
}

export function renderTree(
  container: HTMLElement,
  roots: TreeNode[],
  callbacks: TreeCallbacks,
  states: Map<string, NodeStateName> = new Map(),
  expanded: Set<string> = new Set(),
): void {
  container.innerHTML = '';
  if (roots.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'This schema has no events yet.';
    container.appendChild(empty);
    return;
  }
  const list = document.createElement('ul');
  list.className = 'schema-tree';
  roots.forEach((root) => list.appendChild(renderNode(root, callbacks, states, expanded)));
  container.appendChild(list);
}

function renderNode(
  node: TreeNode,
  callbacks: TreeCallbacks,
  states: Map<string, NodeStateName>,
  expanded: Set<string>,
): HTMLElement {
  const item = document.createElement('li');
  item.dataset.nodeId = node.id;

  const row = document.createElement('div');
  row.className = `tree-row ${stateClass(states.get(node.id))}`.trim();

  if (node.children.length > 0) {
    const toggle = document.createElement('button');
    toggle.className = 'toggle';
    toggle.textContent = expanded.has(node.id) ? '−' : '+';
    toggle.addEventListener('click', (ev) => {
      ev.stopPropagation();
      if (expanded.has(node.id)) {
        expanded.delete(node.id);
      } else {
        expanded.add(node.id);
      }
      const childList = item.querySelector(':scope > ul');
      if (childList) {
        childList.classList.toggle('collapsed', !expanded.has(node.id));
        toggle.textContent = expanded.has(node.id) ? '−' : '+';
      }
    });
    row.appendChild(toggle);
  }

  const label = document.createElement('span');
  label.className = 'node-label';
  label.textContent = `${node.id}  ${node.name}`;
  row.appendChild(label);

  if (node.gate !== 'none') {
    const badge = document.createElement('span');
    badge.className = `gate-badge gate-${node.gate}`;
    badge.textContent = node.gate;
    row.appendChild(badge);
  }
  if (node.importance !== null) {
    const imp = document.createElement('span');
    imp.className = 'importance';
    imp.textContent = `P${node.importance}`;
    row.appendChild(imp);
  }

  row.addEventListener('click', () => callbacks.onSelect(node.id));
  item.appendChild(row);

  if (node.children.length > 0) {
    const childList = document.createElement('ul');
    childList.classList.toggle('collapsed', !expanded.has(node.id));
    node.children.forEach((child) => childList.appendChild(renderNode(child, callbacks, states, expanded)));
    item.appendChild(childList);
  }
  return item;
}
