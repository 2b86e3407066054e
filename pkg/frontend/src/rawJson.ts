/**
 * JSON parser that keeps the source text of every number.
 *
 * The dashboard shows agreement values exactly as the service wrote them.
 * JSON.parse collapses numbers through the double round-trip and the
 * re-rendered string can differ from the wire form, so this parser wraps
 * every number in a RawNum carrying the original lexeme.
 */

export class RawNum {
  constructor(
    readonly raw: string,
    readonly value: number,
  ) {}

  toString(): string {
    return this.raw;
  }
}

export type RawJson =
  | null
  | boolean
  | string
  | RawNum
  | RawJson[]
  | { [key: string]: RawJson };

export class JsonSyntaxError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "JsonSyntaxError";
  }
}

const NUMBER_RE = /-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/y;
const WS = new Set([" ", "\t", "\n", "\r"]);

class Parser {
  pos = 0;

  constructor(private readonly text: string) {}

  atEnd(): boolean {
    return this.pos >= this.text.length;
  }

  skipWs(): void {
    while (!this.atEnd() && WS.has(this.text[this.pos])) {
      this.pos += 1;
    }
  }

  private fail(message: string): never {
    throw new JsonSyntaxError(`${message} at offset ${this.pos}`);
  }

  private expect(ch: string): void {
    if (this.text[this.pos] !== ch) {
      this.fail(`expected ${JSON.stringify(ch)}`);
    }
    this.pos += 1;
  }

  private literal(word: string, value: RawJson): RawJson {
    if (this.text.startsWith(word, this.pos)) {
      this.pos += word.length;
      return value;
    }
    this.fail(`expected ${word}`);
  }

  parseValue(): RawJson {
    this.skipWs();
    if (this.atEnd()) {
      this.fail("unexpected end of input");
    }
    const ch = this.text[this.pos];
    if (ch === "{") return this.parseObject();
    if (ch === "[") return this.parseArray();
    if (ch === '"') return this.parseString();
    if (ch === "t") return this.literal("true", true);
    if (ch === "f") return this.literal("false", false);
    if (ch === "n") return this.literal("null", null);
    return this.parseNumber();
  }

  private parseNumber(): RawNum {
    NUMBER_RE.lastIndex = this.pos;
    const match = NUMBER_RE.exec(this.text);
    if (match === null || match[0].length === 0) {
      this.fail("expected a value");
    }
    this.pos += match[0].length;
    return new RawNum(match[0], Number(match[0]));
  }

  private parseString(): string {
    this.expect('"');
    let out = "";
    for (;;) {
      if (this.atEnd()) {
        this.fail("unterminated string");
      }
      const ch = this.text[this.pos];
      if (ch === '"') {
        this.pos += 1;
        return out;
      }
      if (ch === "\\") {
        out += this.parseEscape();
        continue;
      }
      if (ch.charCodeAt(0) < 0x20) {
        this.fail("control character in string");
      }
      out += ch;
      this.pos += 1;
    }
  }

  private parseEscape(): string {
    this.pos += 1;
    const ch = this.text[this.pos];
    this.pos += 1;
    switch (ch) {
      case '"':
        return '"';
      case "\\":
        return "\\";
      case "/":
        return "/";
      case "b":
        return "\b";
      case "f":
        return "\f";
      case "n":
        return "\n";
      case "r":
        return "\r";
      case "t":
        return "\t";
      case "u": {
        const hex = this.text.slice(this.pos, this.pos + 4);
        if (!/^[0-9a-fA-F]{4}$/.test(hex)) {
          this.fail("bad unicode escape");
        }
        this.pos += 4;
        return String.fromCharCode(parseInt(hex, 16));
      }
      default:
        this.fail("bad escape");
    }
  }

  private parseArray(): RawJson[] {
    this.expect("[");
    const items: RawJson[] = [];
    this.skipWs();
    if (this.text[this.pos] === "]") {
      this.pos += 1;
      return items;
    }
    for (;;) {
      items.push(this.parseValue());
      this.skipWs();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos += 1;
        continue;
      }
      if (ch === "]") {
        this.pos += 1;
        return items;
      }
      this.fail("expected ',' or ']'");
    }
  }

  private parseObject(): { [key: string]: RawJson } {
    this.expect("{");
    const out: { [key: string]: RawJson } = {};
    this.skipWs();
    if (this.text[this.pos] === "}") {
      this.pos += 1;
      return out;
    }
    for (;;) {
      this.skipWs();
      const key = this.parseString();
      this.skipWs();
      this.expect(":");
      out[key] = this.parseValue();
      this.skipWs();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos += 1;
        continue;
      }
      if (ch === "}") {
        this.pos += 1;
        return out;
      }
      this.fail("expected ',' or '}'");
    }
  }
}

export function parseRawJson(text: string): RawJson {
  const parser = new Parser(text);
  const value = parser.parseValue();
  parser.skipWs();
  if (!parser.atEnd()) {
    throw new JsonSyntaxError("trailing characters after JSON value");
  }
  return value;
}

/* Shape accessors. The service contract is stable, so a mismatch is a bug
   worth a loud error rather than a silent undefined. */

export function asObject(
  value: RawJson,
  what: string,
): { [key: string]: RawJson } {
  if (value === null || typeof value !== "object" || Array.isArray(value) || value instanceof RawNum) {
    throw new TypeError(`expected object for ${what}`);
  }
  return value;
}

export function asArray(value: RawJson, what: string): RawJson[] {
  if (!Array.isArray(value)) {
    throw new TypeError(`expected array for ${what}`);
  }
  return value;
}

export function asString(value: RawJson, what: string): string {
  if (typeof value !== "string") {
    throw new TypeError(`expected string for ${what}`);
  }
  return value;
}

export function asNum(value: RawJson, what: string): RawNum {
  if (!(value instanceof RawNum)) {
    throw new TypeError(`expected number for ${what}`);
  }
  return value;
}

export function asNumOrNull(value: RawJson, what: string): RawNum | null {
  if (value === null) {
    return null;
  }
  return asNum(value, what);
}
