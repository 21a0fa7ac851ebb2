/* tslint:disable */
/* eslint-disable */

export function circleProfile(_function: string, alpha: number, r: number, samples: number): Float64Array;

export function classifyRgba(_function: string, alpha: number, x0: number, y0: number, x1: number, y1: number, width: number, height: number, depth: number): Uint8Array;

export function figure1Curves(x_start: number, x_max: number, step: number, count: number): string;

export function hardyLocus(alpha: number, r_min: number, r_max: number, count: number): string;

export function legend(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly circleProfile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly classifyRgba: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly figure1Curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly hardyLocus: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly legend: () => [number, number];
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
