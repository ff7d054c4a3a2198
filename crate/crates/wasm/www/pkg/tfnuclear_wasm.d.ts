/* tslint:disable */
/* eslint-disable */

/**
 * Associated function on its default `log t` grid plus the verdict.
 */
export class KomatsuView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly log_t: Float64Array;
    readonly m: Float64Array;
    readonly verdict: string;
}

export function komatsu_associated(family: string, a: number, b: number): KomatsuView;

export function stft_magnitudes(kind: string, param: number, alpha: number, beta: number, k: number, n: number): Float64Array;

export function young_conjugate_curve(family: string, param: number, s_max: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_komatsuview_free: (a: number, b: number) => void;
    readonly komatsu_associated: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly komatsuview_log_t: (a: number) => [number, number];
    readonly komatsuview_m: (a: number) => [number, number];
    readonly komatsuview_verdict: (a: number) => [number, number];
    readonly stft_magnitudes: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly young_conjugate_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
