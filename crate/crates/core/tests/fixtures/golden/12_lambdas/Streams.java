package com.example;

import java.util.List;
import java.util.function.Function;
import java.util.stream.Collectors;

public class Streams {
    static List<Integer> lengths(List<String> words) {
        return words.stream()
                .map(String::length)
                .filter(n -> n > 2)
                .collect(Collectors.toList());
    }

    static Function<Object, String> describer() {
        return (Object o) -> {
            String s = (String) o;
            double d = (double) s.length();
            return s + (d * 2);
        };
    }

    static int kind(int k) {
        return switch (k) {
            case 1, 2 -> 10;
            default -> {
                yield (k > 5) ? 1 : 0;
            }
        };
    }
}
