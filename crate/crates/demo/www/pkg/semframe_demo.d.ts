/* tslint:disable */
/* eslint-disable */

export class ClusterView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Merge heights in merge order.
     */
    readonly heights: Float64Array;
    /**
     * Cluster index per point.
     */
    readonly labels: Uint32Array;
    /**
     * Flattened `(left, right)` node ids per merge; ids ≥ n are earlier merges.
     */
    readonly merges: Uint32Array;
}

export class DecisionMap {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly accuracy: number;
    /**
     * Row-major predicted class per grid cell, top row first.
     */
    readonly cells: Uint32Array;
    readonly epochs: number;
    readonly loss: number;
}

export function clusterPoints(xs: Float64Array, ys: Float64Array, metric: string, linkage: string, k: number): ClusterView;

/**
 * Trains on points in the unit square and classifies a `width × height` grid.
 */
export function decisionMap(xs: Float64Array, ys: Float64Array, classes: Uint32Array, width: number, height: number, l2: number, epochs: number): DecisionMap;

/**
 * `[purity, inverse_purity, purity_f1, bcubed_precision, bcubed_recall, bcubed_f1]`
 * for two whitespace-separated label sequences of equal length.
 */
export function score(pred: string, gold: string): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_clusterview_free: (a: number, b: number) => void;
    readonly __wbg_decisionmap_free: (a: number, b: number) => void;
    readonly clusterPoints: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly clusterview_heights: (a: number) => [number, number];
    readonly clusterview_labels: (a: number) => [number, number];
    readonly clusterview_merges: (a: number) => [number, number];
    readonly decisionMap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly decisionmap_accuracy: (a: number) => number;
    readonly decisionmap_cells: (a: number) => [number, number];
    readonly decisionmap_epochs: (a: number) => number;
    readonly decisionmap_loss: (a: number) => number;
    readonly score: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
