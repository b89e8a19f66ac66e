/**
 * Stub answers: deterministic, model-free implementations of every method.
 * A pure function of the request document, so recorded conversations stay
 * byte-stable across runs and machines.
 */

import {
  BRIDGE_METHODS,
  docToImage,
  imageToDoc,
  type ImageDoc,
} from "./protocol";

function requireString(value: unknown, name: string): string {
  if (typeof value !== "string") throw new Error(`${name} must be a string`);
  return value;
}

function requireInt(value: unknown, name: string): number {
  if (!Number.isInteger(value)) throw new Error(`${name} must be an integer`);
  return value as number;
}

export function stubAnswer(
  method: string,
  params: Record<string, unknown>,
): unknown {
  switch (method) {
    case "health":
      return { methods: [...BRIDGE_METHODS] };

    case "caption": {
      const img = docToImage(params.image);
      requireString(params.query, "query");
      return { caption: `a scene of ${img.width}x${img.height} pixels` };
    }

    case "correct":
      return { text: requireString(params.text, "text") };

    case "reconstruct": {
      if (params.image != null) {
        docToImage(params.image); // validate before echoing
        return { image: params.image as ImageDoc };
      }
      const width = requireInt(params.width, "width");
      const height = requireInt(params.height, "height");
      const blank = Buffer.alloc(width * height * 3, 255);
      return { image: imageToDoc({ width, height, pixels: blank }) };
    }

    case "lpips": {
      const a = docToImage(params.a);
      const b = docToImage(params.b);
      if (a.width !== b.width || a.height !== b.height) return { lpips: 1.0 };
      if (a.pixels.length === 0) return { lpips: 0.0 };
      let total = 0;
      for (let i = 0; i < a.pixels.length; i++) {
        total += Math.abs(a.pixels[i] - b.pixels[i]);
      }
      return { lpips: total / (a.pixels.length * 255) };
    }

    case "segment": {
      const img = docToImage(params.image);
      return {
        bbox: {
          cx: img.width / 2,
          cy: img.height / 2,
          halfw: img.width / 2,
          halfh: img.height / 2,
        },
      };
    }

    default:
      throw new Error(`unknown method ${JSON.stringify(method)}`);
  }
}
