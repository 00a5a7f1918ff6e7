/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_clusterview_free: (a: number, b: number) => void;
export const __wbg_decisionmap_free: (a: number, b: number) => void;
export const clusterPoints: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const clusterview_heights: (a: number) => [number, number];
export const clusterview_labels: (a: number) => [number, number];
export const clusterview_merges: (a: number) => [number, number];
export const decisionMap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const decisionmap_accuracy: (a: number) => number;
export const decisionmap_cells: (a: number) => [number, number];
export const decisionmap_epochs: (a: number) => number;
export const decisionmap_loss: (a: number) => number;
export const score: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
