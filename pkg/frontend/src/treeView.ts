// Tree inspector: the software's current shape, with node metadata
// (description, record purpose) surfaced on hover via title attributes.

import type { TreeNode } from './types.js';
import { h, VNode } from './view.js';

function hoverText(node: TreeNode): string {
    if (node.record) {
        return `${node.record.purpose}\nusage: ${node.record.usage}`;
    }
    return node.description || node.name;
}

function renderNode(node: TreeNode): VNode {
    const children = (node.children ?? []).map(renderNode);
    return h(
        'li',
        { class: `node node-${node.kind}`, title: hoverText(node) },
        h('span', { class: 'name' }, node.name),
        children.length > 0 ? h('ul', {}, ...children) : null,
    );
}

export function renderTree(root: TreeNode): VNode {
    return h('ul', { class: 'tree' }, renderNode(root));
}
