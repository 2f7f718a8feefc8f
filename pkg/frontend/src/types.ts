// Payload shapes served by the runtime's HTTP API.

export interface FunctionalityRecord {
    path: string;
    purpose: string;
    usage: string;
    dependencies: string[];
    created_at: string | null;
    updated_at: string | null;
}

export interface TreeNode {
    name: string;
    kind: 'directory' | 'file';
    description: string;
    children?: TreeNode[];
    record?: FunctionalityRecord;
}

export interface EvolutionEvent {
    seq: number;
    timestamp: string;
    session_id: string;
    kind: string;
    payload: Record<string, unknown>;
}

export interface FsChange {
    path: string;
    change: 'created' | 'modified' | 'deleted';
    digest: string | null;
}

export interface ExecutionCell {
    status: 'completed' | 'error';
    error_class: string | null;
    stdout_norm: string;
    stderr_tail: string;
    fs_delta: FsChange[];
    env_delta: Record<string, string | null>;
    wall_time: number;
}

export interface SuiteInput {
    label: string;
    argv: string[];
    stdin?: string;
    pre_files?: { path: string; content: string }[];
}

export interface CandidateSummary {
    generation_index: number;
    path: string;
    program_text: string;
}

export interface ValidationReport {
    loss_matrix: number[][];
    risk: number[];
    err: number[];
    selected_index: number;
    verdict: 'accepted' | 'rejected';
    feedback: string | null;
    suite: SuiteInput[];
    candidates: CandidateSummary[];
    result_matrix: ExecutionCell[][];
}

export interface TranscriptEntry {
    author: 'user' | 'software';
    text: string;
    turn: number;
}
