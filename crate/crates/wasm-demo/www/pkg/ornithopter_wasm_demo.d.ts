/* tslint:disable */
/* eslint-disable */

/**
 * Lift and drag coefficients and aerodynamic-center fraction over
 * `α ∈ [0°, 180°]`. Rows: `[α (deg), C_L, C_D, γ_ac]`.
 */
export function coefficient_curves(samples: number): Float64Array;

/**
 * Default amplitudes `[φ_m, θ_m, ψ_m]` in degrees, for slider defaults.
 */
export function default_amplitudes(fore: boolean): Float64Array;

/**
 * Leading and trailing edge of the right fore or hind wing for a chord
 * scale in metres per unit. Rows: `[r, x_LE, x_TE (mm)]`, with the trailing
 * edge clamped where the fitted edges cross. Empty for a scale ≤ 0.
 */
export function planform(fore: boolean, samples: number, chord_scale: number): Float64Array;

/**
 * Flapping, pitching and deviation angles over one period of the
 * reference fore or hind waveform, with the three amplitudes (degrees)
 * replaced. Rows: `[t (ms), φ, θ, ψ (deg)]`.
 */
export function wing_angles(fore: boolean, samples: number, phi_m: number, theta_m: number, psi_m: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coefficient_curves: (a: number) => [number, number];
    readonly default_amplitudes: (a: number) => [number, number];
    readonly planform: (a: number, b: number, c: number) => [number, number];
    readonly wing_angles: (a: number, b: number, c: number, d: number, e: number) => [number, number];
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
