// Token pooling: sentence vectors are the mean of per-token hidden states
// over real tokens only, so padding can never leak into the embedding.

export interface TokenStates {
  hidden: Float32Array; // row-major, nTokens * hiddenSize
  nTokens: number;
  hiddenSize: number;
  mask: ArrayLike<number>; // 1 = real token, 0 = padding
}

export function maskedMeanPool(states: TokenStates): Float32Array {
  const { hidden, nTokens, hiddenSize, mask } = states;
  if (hidden.length !== nTokens * hiddenSize) {
    throw new Error(`hidden length ${hidden.length} != ${nTokens} * ${hiddenSize}`);
  }
  if (mask.length !== nTokens) {
    throw new Error(`mask length ${mask.length} != ${nTokens} tokens`);
  }
  const sum = new Float64Array(hiddenSize);
  let count = 0;
  for (let t = 0; t < nTokens; t++) {
    if (!mask[t]) continue;
    count += 1;
    const base = t * hiddenSize;
    for (let j = 0; j < hiddenSize; j++) {
      sum[j] += hidden[base + j];
    }
  }
  if (count === 0) {
    throw new Error("cannot pool: no unmasked tokens");
  }
  const out = new Float32Array(hiddenSize);
  for (let j = 0; j < hiddenSize; j++) {
    out[j] = sum[j] / count;
  }
  return out;
}
