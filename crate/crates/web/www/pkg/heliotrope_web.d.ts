/* tslint:disable */
/* eslint-disable */

/**
 * Orients a panel on a seeded `unimodal` or `multimodal` scene.
 */
export function orient(kind: string, seed: number, delta_theta_deg: number, start_zenith_deg: number, start_azimuth_deg: number): string;

/**
 * 1D scale space of the three-lobe profile (`seed < 0`) or a seeded one.
 */
export function scalespace(seed: number, delta_theta_deg: number): string;

/**
 * Sun elevation and compass azimuth every ten minutes of a local day.
 */
export function sun_path(latitude_deg: number, longitude_deg: number, date: string, utc_offset_hours: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly orient: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scalespace: (a: number, b: number) => [number, number, number, number];
    readonly sun_path: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
