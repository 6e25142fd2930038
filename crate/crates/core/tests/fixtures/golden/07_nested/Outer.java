package com.example;

import java.util.Comparator;

public class Outer {
    private int value;

    public static class Builder {
        private int value;

        public Builder value(int v) {
            this.value = v;
            return this;
        }

        public Outer build() {
            Outer o = new Outer();
            o.value = value;
            return o;
        }
    }

    class Inner {
        int twice() {
            return value * 2;
        }
    }

    Comparator<Outer> comparator() {
        return new Comparator<Outer>() {
            @Override
            public int compare(Outer a, Outer b) {
                return Integer.compare(a.value, b.value);
            }
        };
    }
}
