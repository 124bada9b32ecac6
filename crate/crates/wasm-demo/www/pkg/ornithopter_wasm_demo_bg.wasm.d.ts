/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const coefficient_curves: (a: number) => [number, number];
export const default_amplitudes: (a: number) => [number, number];
export const planform: (a: number, b: number, c: number) => [number, number];
export const wing_angles: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
