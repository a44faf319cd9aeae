/* tslint:disable */
/* eslint-disable */

/**
 * Closedness report as JSON.
 */
export function classify(a: number, b: number, c: number): string;

/**
 * Members of the family of `⟨x, e₁⟩ ∘ ψ⁻¹` with `Q₁₃ = rate`, one block of
 * `count` points per entry of `ts`, followed by the two focal sets.
 */
export function family_s2(rate: number, ts: Float64Array, count: number, seed: bigint): Float64Array;

/**
 * Unit-speed geodesic from `e₁` with generator `(a, b, c)` on `[0, s_max]`.
 */
export function geodesic_s2(a: number, b: number, c: number, s_max: number, samples: number): Float64Array;

/**
 * `f(y)` for the same example, for picking on the canvas.
 */
export function iso_value(rate: number, x: number, y: number, z: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classify: (a: number, b: number, c: number) => [number, number, number, number];
    readonly family_s2: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly geodesic_s2: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly iso_value: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
