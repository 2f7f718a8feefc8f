import { describe, expect, it } from 'vitest';

import { renderTree } from '../src/treeView.js';
import { renderToHtml } from '../src/view.js';
import type { TreeNode } from '../src/types.js';
import { fixture } from './helpers.js';

const tree = fixture<TreeNode>('case1_tree.json');

describe('tree inspector on the recorded case-1 tree', () => {
    const html = renderToHtml(renderTree(tree));

    it('renders the integrated component', () => {
        expect(html).toContain('weather_forecast.py');
        expect(html).toContain('node-file');
        expect(html).toContain('node-directory');
    });

    it('surfaces record purpose and usage on hover', () => {
        expect(html).toMatch(/title="[^"]*weather forecast[^"]*"/);
        expect(html).toMatch(/title="[^"]*usage:[^"]*"/);
    });

    it('escapes metadata destined for attributes', () => {
        const spiky: TreeNode = {
            name: 'x.py',
            kind: 'file',
            description: 'uses "quotes" & <tags>',
        };
        const rendered = renderToHtml(renderTree({ name: '.', kind: 'directory', description: '', children: [spiky] }));
        expect(rendered).toContain('&quot;quotes&quot; &amp; &lt;tags&gt;');
    });
});
