// Minimal view layer: pure virtual nodes renderable to an HTML string
// (what the component tests assert on) or mounted onto real DOM in the
// browser. No framework, no client-side state beyond what the caller holds.

export interface VNode {
    tag: string;
    attrs: Record<string, string>;
    children: Array<VNode | string>;
}

export function h(
    tag: string,
    attrs: Record<string, string> = {},
    ...children: Array<VNode | string | null | undefined>
): VNode {
    return {
        tag,
        attrs,
        children: children.filter((c): c is VNode | string => c !== null && c !== undefined),
    };
}

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}

export function renderToHtml(node: VNode | string): string {
    if (typeof node === 'string') {
        return escapeHtml(node);
    }
    const attrs = Object.entries(node.attrs)
        .map(([key, value]) => ` ${key}="${escapeHtml(value)}"`)
        .join('');
    const inner = node.children.map(renderToHtml).join('');
    return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

export function mount(node: VNode | string, target: Element): void {
    target.replaceChildren(toDom(node));
}

function toDom(node: VNode | string): Node {
    if (typeof node === 'string') {
        return document.createTextNode(node);
    }
    const el = document.createElement(node.tag);
    for (const [key, value] of Object.entries(node.attrs)) {
        el.setAttribute(key, value);
    }
    for (const child of node.children) {
        el.appendChild(toDom(child));
    }
    return el;
}
