/** Target and hatred-level copy shown to annotators. */

export interface TargetInfo {
  slug: string;
  name: string;
  hint: string;
}

// Order matters: label code lists are always in this target order.
export const TARGETS: readonly TargetInfo[] = [
  {
    slug: "individuals",
    name: "Individuals",
    hint: "A specific person, named or pointed at with personal pronouns.",
  },
  {
    slug: "groups",
    name: "Groups",
    hint: "A collective of people: a team, fandom, profession, or community.",
  },
  {
    slug: "religion/creed",
    name: "Religion / creed",
    hint: "A faith or belief system, or its followers.",
  },
  {
    slug: "race/ethnicity",
    name: "Race / ethnicity",
    hint: "A racial, ethnic, or national identity.",
  },
  {
    slug: "politics",
    name: "Politics",
    hint: "Political parties, institutions, movements, or their supporters.",
  },
];

export type LevelCode = 0 | 1 | 2 | 3;

export interface LevelInfo {
  code: LevelCode;
  name: string;
  tooltip: string;
}

export const LEVELS: readonly LevelInfo[] = [
  {
    code: 0,
    name: "Normal",
    tooltip:
      "This target is not mentioned in the comment. Pick Normal even when " +
      "the comment is offensive about something else.",
  },
  {
    code: 1,
    name: "Clean",
    tooltip:
      "The comment mentions this target without offensive or hateful " +
      "wording and without any intent to insult it.",
  },
  {
    code: 2,
    name: "Offensive",
    tooltip:
      "The comment uses rude or profane wording around this target, but " +
      "its content does not aim to insult the target itself.",
  },
  {
    code: 3,
    name: "Hate",
    tooltip:
      "The comment intends to offend, attack, or threaten this target, " +
      "with or without explicit slurs. Figurative and metaphorical attacks " +
      "count.",
  },
];

export function levelName(code: number): string {
  const info = LEVELS.find((l) => l.code === code);
  return info ? info.name : `level ${code}`;
}
