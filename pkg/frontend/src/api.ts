// Typed client for the runtime HTTP API. The console mutates nothing
// through this client except posting user messages; every other call is a
// read.

import type { EvolutionEvent, TreeNode, ValidationReport } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        public status: number,
        message: string,
    ) {
        super(message);
    }
}

export class ConsoleApi {
    constructor(
        private baseUrl: string,
        private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
            method,
            headers: body !== undefined ? { 'Content-Type': 'application/json' } : undefined,
            body: body !== undefined ? JSON.stringify(body) : undefined,
        });
        if (!response.ok) {
            throw new ApiError(response.status, `${method} ${path} -> ${response.status}`);
        }
        return (await response.json()) as T;
    }

    async createSession(): Promise<string> {
        const data = await this.request<{ session_id: string }>('POST', '/api/sessions');
        return data.session_id;
    }

    async postMessage(sessionId: string, text: string): Promise<{ reply: string; turn: number }> {
        return this.request('POST', `/api/sessions/${sessionId}/messages`, { text });
    }

    async fetchEvents(sessionId: string, after: number, waitSecs = 0): Promise<EvolutionEvent[]> {
        const wait = waitSecs > 0 ? `&wait=${waitSecs}` : '';
        const data = await this.request<{ events: EvolutionEvent[] }>(
            'GET',
            `/api/sessions/${sessionId}/events?after=${after}${wait}`,
        );
        return data.events;
    }

    async fetchTree(): Promise<TreeNode> {
        return this.request('GET', '/api/tree');
    }

    async fetchValidation(eventSeq: number): Promise<ValidationReport> {
        return this.request('GET', `/api/validations/${eventSeq}`);
    }
}
