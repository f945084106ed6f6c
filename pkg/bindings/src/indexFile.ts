import { readFile } from "node:fs/promises";
import { crc32 } from "node:zlib";

/** Fields readable from an index file without touching the search core. */
export interface IndexHeader {
  version: number;
  boundMode: "max_augmented_row_norm" | "explicit";
  u: number;
  maxRowNorm: number;
  vocabSize: number;
  dim: number;
}

const MAGIC = "FGDI";

/**
 * Read and checksum-verify the header of an index file.
 *
 * Layout (little-endian): magic "FGDI", version u32, bound mode u8,
 * U f64, max row norm f64, vocab u64, dim+2 u32, point/graph sections,
 * trailing CRC32 over all preceding bytes.
 */
export async function readIndexHeader(path: string): Promise<IndexHeader> {
  const data = await readFile(path);
  if (data.length < 41) {
    throw new Error(`${path}: truncated index file (${data.length} bytes)`);
  }
  if (data.toString("latin1", 0, 4) !== MAGIC) {
    throw new Error(`${path}: bad magic, expected ${MAGIC}`);
  }
  const stored = data.readUInt32LE(data.length - 4);
  const actual = crc32(data.subarray(0, data.length - 4)) >>> 0;
  if (stored !== actual) {
    throw new Error(`${path}: checksum mismatch`);
  }
  const version = data.readUInt32LE(4);
  if (version !== 1) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const modeCode = data.readUInt8(8);
  if (modeCode !== 0 && modeCode !== 1) {
    throw new Error(`${path}: unknown bound mode ${modeCode}`);
  }
  const vocab = data.readBigUInt64LE(25);
  const dimPlus2 = data.readUInt32LE(33);
  return {
    version,
    boundMode: modeCode === 0 ? "max_augmented_row_norm" : "explicit",
    u: data.readDoubleLE(9),
    maxRowNorm: data.readDoubleLE(17),
    vocabSize: Number(vocab),
    dim: dimPlus2 - 2,
  };
}
