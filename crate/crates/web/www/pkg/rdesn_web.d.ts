/* tslint:disable */
/* eslint-disable */

/**
 * Truth and ESN prediction at one probe cell over the rollout.
 */
export class Forecast {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly fitNrmse: number;
    readonly nrmse: number;
    readonly pred: Float64Array;
    readonly truth: Float64Array;
}

/**
 * A running simulation the page steps and paints.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Spatial entropy (bits) of C, V and H.
     */
    entropy(): Float64Array;
    /**
     * Largest finite-time Lyapunov exponent over the next `horizon` steps.
     */
    lyapunov(horizon: number): number;
    constructor(version: number, n: number, seed: bigint);
    /**
     * Changes `chi` and the diffusion coefficients; rejected if unstable.
     */
    setParameters(chi: number, d_c: number, d_v: number, d_h: number): void;
    sliceRgba(field: string, z: number): Uint8Array;
    step(steps: number): void;
    readonly size: number;
    readonly time: bigint;
}

export function forecast(version: number, n: number, train: number, rollout: number, units: number, seed: bigint, field: string, x: number, y: number, z: number): Forecast;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_forecast_free: (a: number, b: number) => void;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly forecast: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number, h: number, i: number, j: number, k: number) => [number, number, number];
    readonly forecast_fitNrmse: (a: number) => number;
    readonly forecast_nrmse: (a: number) => number;
    readonly forecast_pred: (a: number) => [number, number];
    readonly forecast_truth: (a: number) => [number, number];
    readonly simulation_entropy: (a: number) => [number, number, number, number];
    readonly simulation_lyapunov: (a: number, b: number) => [number, number, number];
    readonly simulation_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly simulation_setParameters: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly simulation_size: (a: number) => number;
    readonly simulation_sliceRgba: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulation_step: (a: number, b: number) => [number, number];
    readonly simulation_time: (a: number) => bigint;
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
