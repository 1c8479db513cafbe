/* tslint:disable */
/* eslint-disable */

/**
 * `P` and `F` against gain for a coherent input, one series per cutoff
 * `1..=n_max`.
 */
export function coherent_curves(alpha: number, g_min: number, g_max: number, steps: number, n_max: number): string;

/**
 * `P`, fidelity bound and EPR criterion against gain at fixed target
 * squeezing, with the two reference criteria.
 */
export function epr_curves(chi_prime: number, eta: number, g_min: number, g_max: number, steps: number, n_max: number): string;

/**
 * Optimal criterion, cutoff and gain on `steps` transmissions spread over
 * `(0, 1]`.
 */
export function optimize_sweep(chi_prime: number, f_min: number, p_min: number, steps: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coherent_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly epr_curves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly optimize_sweep: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
