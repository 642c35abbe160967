/** Session state: an append-only list of immutable generation cards plus
 * what-if comparison pairs referencing existing cards. */

import type { FramesPayload, GenerateRequest } from "./api.js";

export interface Card {
  id: number;
  request: GenerateRequest; // exactly what was sent to /api/generate
  payload: FramesPayload;
  describeBack: { question: string; description: string } | null;
}

export interface Comparison {
  baseId: number;
  editedId: number;
  editedWordIndex: number;
}

export interface Session {
  cards: Card[];
  comparisons: Comparison[];
  nextId: number;
}

export function newSession(): Session {
  return { cards: [], comparisons: [], nextId: 1 };
}

export function addCard(
  session: Session,
  request: GenerateRequest,
  payload: FramesPayload,
): { session: Session; card: Card } {
  const card: Card = { id: session.nextId, request, payload, describeBack: null };
  return {
    session: {
      ...session,
      cards: [...session.cards, card],
      nextId: session.nextId + 1,
    },
    card,
  };
}

export function getCard(session: Session, id: number): Card {
  const card = session.cards.find((c) => c.id === id);
  if (!card) throw new Error(`no card ${id}`);
  return card;
}

export function withDescribeBack(
  session: Session,
  id: number,
  question: string,
  description: string,
): Session {
  return {
    ...session,
    cards: session.cards.map((c) =>
      c.id === id ? { ...c, describeBack: { question, description } } : c,
    ),
  };
}

export function addComparison(
  session: Session,
  baseId: number,
  editedId: number,
  editedWordIndex: number,
): Session {
  getCard(session, baseId);
  getCard(session, editedId);
  return {
    ...session,
    comparisons: [...session.comparisons, { baseId, editedId, editedWordIndex }],
  };
}

/** The request a what-if edit must send: identical to the base card's
 * request except for the prompt, which differs in exactly one word. */
export function whatIfRequest(base: Card, editedPrompt: string): GenerateRequest {
  return { ...base.request, prompt: editedPrompt };
}
