// Validation viewer: the loss matrix, risk/err vectors and winner that
// justified a selection, plus each candidate's program and per-input
// results. Malformed payloads render an error banner, never a blank panel.

import type { ExecutionCell, ValidationReport } from './types.js';
import { h, VNode } from './view.js';

export function parseReport(raw: unknown): ValidationReport | null {
    if (typeof raw !== 'object' || raw === null) {
        return null;
    }
    const report = raw as Partial<ValidationReport>;
    if (
        !Array.isArray(report.loss_matrix) ||
        !Array.isArray(report.risk) ||
        !Array.isArray(report.err) ||
        typeof report.selected_index !== 'number' ||
        (report.verdict !== 'accepted' && report.verdict !== 'rejected')
    ) {
        return null;
    }
    const n = report.risk.length;
    if (
        n === 0 ||
        report.err.length !== n ||
        report.loss_matrix.length !== n ||
        report.selected_index < 1 ||
        report.selected_index > n
    ) {
        return null;
    }
    return report as ValidationReport;
}

export function renderValidation(raw: unknown): VNode {
    const report = parseReport(raw);
    if (report === null) {
        return h(
            'div',
            { class: 'panel validation error-banner', role: 'alert' },
            'Validation report is malformed or missing; nothing to display.',
        );
    }
    const n = report.risk.length;
    const winner = report.selected_index;
    return h(
        'div',
        { class: 'panel validation' },
        header(report),
        lossMatrix(report),
        scoreTable(report),
        ...report.candidates.map((candidate, i) =>
            candidatePanel(
                candidate.generation_index,
                candidate.path,
                candidate.program_text,
                report,
                i,
            ),
        ),
        report.feedback
            ? h('div', { class: 'feedback' }, h('h4', {}, 'repair feedback'), h('pre', {}, report.feedback))
            : null,
        n === 1 ? h('p', { class: 'note' }, 'single-candidate pool: trivial 1x1 matrix') : null,
        tieNote(report, winner),
    );
}

function header(report: ValidationReport): VNode {
    return h(
        'div',
        { class: 'validation-header' },
        h('span', { class: `verdict verdict-${report.verdict}` }, report.verdict),
        h('span', { class: 'winner' }, `winner: candidate ${report.selected_index}`),
    );
}

function lossMatrix(report: ValidationReport): VNode {
    const n = report.risk.length;
    const head = h(
        'tr',
        {},
        h('th', {}, ''),
        ...labels(n).map((label) => h('th', {}, label)),
    );
    const rows = report.loss_matrix.map((row, i) =>
        h(
            'tr',
            {},
            h('th', {}, `p${i + 1}`),
            ...row.map((value) => h('td', { class: value ? 'loss-1' : 'loss-0' }, String(value))),
        ),
    );
    return h(
        'table',
        { class: 'loss-matrix' },
        h('caption', {}, 'pairwise mismatch loss'),
        head,
        ...rows,
    );
}

function scoreTable(report: ValidationReport): VNode {
    const rows = report.risk.map((risk, i) => {
        const index = i + 1;
        const selected = index === report.selected_index;
        return h(
            'tr',
            { class: selected ? 'candidate-row selected' : 'candidate-row', 'data-candidate': String(index) },
            h('td', {}, `candidate ${index}`),
            h('td', { class: 'risk' }, String(risk)),
            h('td', { class: 'err' }, String(report.err[i])),
            h('td', {}, selected ? 'selected' : ''),
        );
    });
    return h(
        'table',
        { class: 'scores' },
        h('caption', {}, 'risk and error count'),
        h('tr', {}, h('th', {}, 'candidate'), h('th', {}, 'risk'), h('th', {}, 'err'), h('th', {}, '')),
        ...rows,
    );
}

function candidatePanel(
    index: number,
    path: string,
    programText: string,
    report: ValidationReport,
    row: number,
): VNode {
    const results = (report.result_matrix[row] ?? []).map((cell, k) =>
        h(
            'li',
            { class: `cell-${cell.status}` },
            `${report.suite[k]?.label ?? `input ${k + 1}`}: ${cellSummary(cell)}`,
        ),
    );
    return h(
        'details',
        { class: 'candidate', 'data-candidate': String(index) },
        h('summary', {}, `candidate ${index} (${path})`),
        h('pre', { class: 'program' }, programText),
        h('ul', { class: 'results' }, ...results),
    );
}

function cellSummary(cell: ExecutionCell): string {
    if (cell.status === 'error') {
        return `error/${cell.error_class}`;
    }
    const out = cell.stdout_norm.length > 0 ? JSON.stringify(firstLine(cell.stdout_norm)) : 'no output';
    return `ok, ${out}, ${cell.fs_delta.length} file change(s)`;
}

function firstLine(text: string): string {
    const line = text.split('\n', 1)[0];
    return line.length > 60 ? `${line.slice(0, 60)}...` : line;
}

function tieNote(report: ValidationReport, winner: number): VNode | null {
    const key = (i: number) => `${report.risk[i]}:${report.err[i]}`;
    const winnerKey = key(winner - 1);
    const tied = report.risk.map((_, i) => i + 1).filter((idx) => idx !== winner && key(idx - 1) === winnerKey);
    if (tied.length === 0) {
        return null;
    }
    return h(
        'p',
        { class: 'tie-note' },
        `candidates ${[winner, ...tied].join(', ')} tie on (risk, err); ` +
            'selection fell to the earliest generation order',
    );
}

function labels(n: number): string[] {
    return Array.from({ length: n }, (_, i) => `p${i + 1}`);
}
