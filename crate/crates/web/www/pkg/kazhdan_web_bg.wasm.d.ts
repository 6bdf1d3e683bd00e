/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const folner_cycle: (a: number, b: number, c: number) => [number, number, number, number];
export const kesten: (a: number, b: number, c: number) => [number, number, number, number];
export const zuk_tetrahedron: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
