// Production backend: pretrained models via @huggingface/transformers.

import { AutoModel, AutoTokenizer } from "@huggingface/transformers";

import type { EmbeddingBackend } from "./backend.js";
import type { TokenStates } from "./pool.js";

export interface TransformersOptions {
  /** Keep [CLS]/[SEP]-style tokens in the pooled mean (default: drop). */
  includeSpecial?: boolean;
  dtype?: "fp32" | "fp16" | "q8" | "auto";
}

export class TransformersBackend implements EmbeddingBackend {
  hiddenSize = 0;
  private model: any;
  private tokenizer: any;
  private specialIds = new Set<number>();
  private readonly includeSpecial: boolean;

  private constructor(model: any, tokenizer: any, includeSpecial: boolean) {
    this.model = model;
    this.tokenizer = tokenizer;
    this.includeSpecial = includeSpecial;
    for (const key of [
      "cls_token_id",
      "sep_token_id",
      "pad_token_id",
      "bos_token_id",
      "eos_token_id",
    ]) {
      const id = tokenizer[key];
      if (typeof id === "number") this.specialIds.add(id);
    }
  }

  static async load(
    modelId: string,
    options: TransformersOptions = {},
  ): Promise<TransformersBackend> {
    try {
      const tokenizer = await AutoTokenizer.from_pretrained(modelId);
      const model = await AutoModel.from_pretrained(modelId, {
        dtype: options.dtype ?? "fp32",
      });
      return new TransformersBackend(model, tokenizer, options.includeSpecial ?? false);
    } catch (err) {
      throw new Error(
        `cannot load model ${modelId}: ${(err as Error).message} ` +
          "(is the model cached locally or the hub reachable?)",
      );
    }
  }

  async encode(texts: string[], layer: number): Promise<TokenStates[]> {
    const inputs = await this.tokenizer(texts, {
      padding: true,
      truncation: true,
    });
    const output = await this.model(inputs);
    let states = output.last_hidden_state ?? output.logits;
    if (layer !== -1) {
      const all = output.hidden_states;
      if (!all) {
        throw new Error(
          "this model export only provides its final hidden state; " +
            "re-export with hidden states to use --layer",
        );
      }
      states = all[layer < 0 ? all.length + layer : layer];
    }
    const [batch, seqLen, hiddenSize] = states.dims as [number, number, number];
    this.hiddenSize = hiddenSize;
    const data = states.data as Float32Array;
    const maskData = inputs.attention_mask.data as ArrayLike<bigint | number>;
    const idData = inputs.input_ids.data as ArrayLike<bigint | number>;

    const result: TokenStates[] = [];
    for (let b = 0; b < batch; b++) {
      const hidden = data.slice(
        b * seqLen * hiddenSize,
        (b + 1) * seqLen * hiddenSize,
      ) as Float32Array;
      const mask = new Uint8Array(seqLen);
      for (let t = 0; t < seqLen; t++) {
        const attended = Number(maskData[b * seqLen + t]) === 1;
        const tokenId = Number(idData[b * seqLen + t]);
        const special = this.specialIds.has(tokenId);
        mask[t] = attended && (this.includeSpecial || !special) ? 1 : 0;
      }
      if (!mask.some((m) => m === 1)) {
        for (let t = 0; t < seqLen; t++) {
          mask[t] = Number(maskData[b * seqLen + t]) === 1 ? 1 : 0;
        }
      }
      result.push({ hidden, nTokens: seqLen, hiddenSize, mask });
    }
    return result;
  }
}
