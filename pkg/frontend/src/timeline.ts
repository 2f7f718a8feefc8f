// Console state and the per-turn event timeline. All state derives from
// the event log: applying the same events always rebuilds the same
// transcript, and the live cursor never moves backwards.

import type { EvolutionEvent, TranscriptEntry } from './types.js';
import { h, VNode } from './view.js';

export interface ConsoleState {
    sessionId: string;
    events: EvolutionEvent[];
    transcript: TranscriptEntry[];
    liveCursor: number;
    treeStale: boolean;
    selectedEventSeq: number | null;
}

export function initialState(sessionId: string): ConsoleState {
    return {
        sessionId,
        events: [],
        transcript: [],
        liveCursor: 0,
        treeStale: true,
        selectedEventSeq: null,
    };
}

const TREE_CHANGING_KINDS = new Set(['decision', 'integration', 'invocation']);

export function applyEvent(state: ConsoleState, event: EvolutionEvent): ConsoleState {
    if (event.seq <= state.liveCursor) {
        return state; // already seen; the cursor never decreases
    }
    const transcript = [...state.transcript];
    const turn = typeof event.payload.turn === 'number' ? event.payload.turn : 0;
    if (event.kind === 'requirement_received' && typeof event.payload.text === 'string') {
        transcript.push({ author: 'user', text: event.payload.text, turn });
    }
    if (event.kind === 'response' && typeof event.payload.reply === 'string') {
        transcript.push({ author: 'software', text: event.payload.reply, turn });
    }
    return {
        ...state,
        events: [...state.events, event],
        transcript,
        liveCursor: event.seq,
        treeStale: state.treeStale || TREE_CHANGING_KINDS.has(event.kind),
    };
}

export function applyEvents(state: ConsoleState, events: EvolutionEvent[]): ConsoleState {
    return events.reduce(applyEvent, state);
}

export function turnsOf(state: ConsoleState): number[] {
    const turns = new Set<number>();
    for (const event of state.events) {
        if (typeof event.payload.turn === 'number') {
            turns.add(event.payload.turn);
        }
    }
    return [...turns].sort((a, b) => a - b);
}

export function eventsForTurn(state: ConsoleState, turn: number): EvolutionEvent[] {
    return state.events.filter((e) => e.payload.turn === turn);
}

function summarize(event: EvolutionEvent): string {
    const p = event.payload;
    switch (event.kind) {
        case 'requirement_received':
            return String(p.text ?? '');
        case 'decision':
            return `${p.kind}${p.path ? ` ${p.path}` : ''}${p.spec ? ` "${p.spec}"` : ''}`;
        case 'generation_started':
            return `round ${p.round}`;
        case 'candidates_produced':
            return `${p.count} candidates for ${p.path}`;
        case 'validation_report':
            return `${p.verdict}, risk [${(p.risk as number[] | undefined)?.join(', ') ?? ''}]`;
        case 'integration':
            return String(p.path ?? '');
        case 'invocation':
            return `${p.path} ${JSON.stringify(p.argv ?? [])}`;
        case 'response':
            return String(p.reply ?? '');
        case 'failure':
            return `${p.error}: ${p.detail}`;
        default:
            return '';
    }
}

export function renderTimeline(state: ConsoleState, turn: number): VNode {
    const rows = eventsForTurn(state, turn).map((event) =>
        h(
            'li',
            {
                class: `event event-${event.kind}`,
                'data-seq': String(event.seq),
                'data-kind': event.kind,
            },
            h('span', { class: 'kind' }, event.kind),
            h('span', { class: 'summary' }, truncate(summarize(event), 120)),
        ),
    );
    return h(
        'ol',
        { class: 'timeline', 'data-turn': String(turn) },
        ...(rows.length > 0 ? rows : [h('li', { class: 'empty' }, 'no events for this turn')]),
    );
}

export function renderTranscript(state: ConsoleState): VNode {
    return h(
        'ul',
        { class: 'transcript' },
        ...state.transcript.map((entry) =>
            h(
                'li',
                { class: `message from-${entry.author}`, 'data-turn': String(entry.turn) },
                h('span', { class: 'author' }, entry.author),
                h('span', { class: 'text' }, entry.text),
            ),
        ),
    );
}

function truncate(text: string, max: number): string {
    return text.length > max ? `${text.slice(0, max)}...` : text;
}
