/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_forecast_free: (a: number, b: number) => void;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const forecast: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number, h: number, i: number, j: number, k: number) => [number, number, number];
export const forecast_fitNrmse: (a: number) => number;
export const forecast_nrmse: (a: number) => number;
export const forecast_pred: (a: number) => [number, number];
export const forecast_truth: (a: number) => [number, number];
export const simulation_entropy: (a: number) => [number, number, number, number];
export const simulation_lyapunov: (a: number, b: number) => [number, number, number];
export const simulation_new: (a: number, b: number, c: bigint) => [number, number, number];
export const simulation_setParameters: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const simulation_size: (a: number) => number;
export const simulation_sliceRgba: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulation_step: (a: number, b: number) => [number, number];
export const simulation_time: (a: number) => bigint;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
