/* tslint:disable */
/* eslint-disable */

/**
 * Highlight frame JSON for chord `index` of a preset progression
 * (`two_five_one`, `two_five_one_six`, `minor_two_five_one`, `dorian_vamp`).
 * The index wraps around the progression.
 */
export function guided_frame(key: string, progression: string, index: number, approaches: boolean): string;

/**
 * Chord symbol for the held MIDI note numbers, e.g. `"G7"`.
 */
export function recognize(pitches: Uint8Array): string | undefined;

/**
 * Swung position of every `step`-th straight tick across one beat.
 */
export function swing_curve(ratio: number, ppq: number, step: number): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly guided_frame: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly recognize: (a: number, b: number) => [number, number];
    readonly swing_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
