// Live event following by long-poll. A dropped connection resumes from
// the cursor of the last applied event, so nothing is lost or duplicated.

import type { ConsoleApi } from './api.js';
import { applyEvents, ConsoleState } from './timeline.js';

export interface FollowOptions {
    waitSecs?: number;
    retryDelayMs?: number;
    signal?: { stopped: boolean };
    onState: (state: ConsoleState) => void;
    onError?: (error: unknown) => void;
}

export async function followEvents(
    api: ConsoleApi,
    state: ConsoleState,
    options: FollowOptions,
): Promise<ConsoleState> {
    const wait = options.waitSecs ?? 20;
    const retryDelay = options.retryDelayMs ?? 500;
    let current = state;
    while (!options.signal?.stopped) {
        try {
            const events = await api.fetchEvents(current.sessionId, current.liveCursor, wait);
            if (events.length > 0) {
                current = applyEvents(current, events);
                options.onState(current);
            }
        } catch (error) {
            options.onError?.(error);
            await sleep(retryDelay);
        }
    }
    return current;
}

function sleep(ms: number): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, ms));
}
