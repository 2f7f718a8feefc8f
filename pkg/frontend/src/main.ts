// Browser bootstrap: wires the chat panel, tree inspector, validation
// viewer and per-turn timelines onto the runtime HTTP API. Posting user
// messages is the console's only mutation; everything else re-derives
// from the event log.

import { ConsoleApi } from './api.js';
import { followEvents } from './followEvents.js';
import { ConsoleState, initialState, renderTimeline, renderTranscript, turnsOf } from './timeline.js';
import { renderTree } from './treeView.js';
import { renderValidation } from './validationView.js';
import { mount } from './view.js';

async function boot(): Promise<void> {
    const baseUrl = window.location.origin;
    const api = new ConsoleApi(baseUrl);
    const sessionId = await api.createSession();
    let state = initialState(sessionId);

    const transcriptEl = document.getElementById('transcript')!;
    const treeEl = document.getElementById('tree')!;
    const timelineEl = document.getElementById('timeline')!;
    const validationEl = document.getElementById('validation')!;
    const form = document.getElementById('chat-form') as HTMLFormElement;
    const input = document.getElementById('chat-input') as HTMLInputElement;

    async function redraw(next: ConsoleState): Promise<void> {
        state = next;
        mount(renderTranscript(state), transcriptEl);
        const turns = turnsOf(state);
        const lastTurn = turns[turns.length - 1];
        if (lastTurn !== undefined) {
            mount(renderTimeline(state, lastTurn), timelineEl);
        }
        if (state.treeStale) {
            state = { ...state, treeStale: false };
            mount(renderTree(await api.fetchTree()), treeEl);
        }
        const report = [...state.events].reverse().find((e) => e.kind === 'validation_report');
        if (report !== undefined && state.selectedEventSeq !== report.seq) {
            state = { ...state, selectedEventSeq: report.seq };
            mount(renderValidation(await api.fetchValidation(report.seq)), validationEl);
        }
    }

    form.addEventListener('submit', (event) => {
        event.preventDefault();
        const text = input.value.trim();
        if (text.length === 0) {
            return;
        }
        input.value = '';
        void api.postMessage(sessionId, text);
    });

    await redraw(state);
    void followEvents(api, state, {
        onState: (next) => void redraw(next),
        onError: (error) => console.warn('event stream hiccup, resuming', error),
    });
}

void boot();
