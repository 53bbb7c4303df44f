"""Walk one raw CT-style log event through the preprocessing pipeline.

Run:  python3 demos/01_preprocessing_walkthrough.py
"""

from driftparse.preprocess import (
    EventRecord,
    is_number,
    normalize_number,
    preprocess_event,
    stem,
    tokenize,
)

RAW = (
    "&Load scan protocol&,@Patient LOID@=#2.0.123456#,"
    "@Scan protocol name@=#rot00#,@Scandirection@=#cr-ca#,"
    "@kV@=#120#,@mAs@=#250#,@CTDI@=#16.660#,@DLP@=#59.975#,"
    "@ScanUID@=#1.3.12.2.1107.5.1.4.83004.1234567890#"
)


def main():
    print("raw event text:")
    print(f"  {RAW}\n")

    # Step 1: split on the log dialect's structural delimiters (& @ = # ,
    # and whitespace) while keeping '.' and '-' inside tokens, so dotted
    # UIDs and words like 'cr-ca' survive intact.
    raw_tokens = tokenize(RAW)
    print(f"tokenized ({len(raw_tokens)} tokens):")
    print(f"  {raw_tokens}\n")

    # Step 2: stemming makes morphological variants collide on purpose:
    # 'scandirection' and 'scandirected' should count as the same token
    # when mining frequent patterns.
    for word in ("scandirection", "protocol", "slices", "readings"):
        print(f"stem({word!r}) = {stem(word)!r}")
    print()

    # Step 3: numbers are canonicalized to exactly two decimals so that
    # '16.660' in the log and '16.66' in a ground-truth table compare
    # equal. Dotted UIDs are not numbers and pass through untouched.
    for token in ("16.660", "120", "59.975", "1.3.12.2.1107"):
        print(f"normalize_number({token!r}) = {normalize_number(token)!r}")
    print()

    # The full pipeline: tokenize, drop stopwords, stem words, normalize
    # numbers, preserving left-to-right order.
    event = EventRecord("evt-000001", "2018-12-01T08:00:00", "scan", RAW)
    sequence = preprocess_event(event)
    print(f"preprocessed ({len(sequence.tokens)} tokens):")
    print(f"  {list(sequence.tokens)}\n")

    numbers = [t for t in sequence.tokens if is_number(t)]
    print(f"numeric tokens, all canonical: {numbers}")


if __name__ == "__main__":
    main()
